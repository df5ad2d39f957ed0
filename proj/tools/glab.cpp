// Copyright 2026 The glab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// glab run <config> | glab sweep <config> --axis <field> --values ... | glab verify-all [--quick]
// Exit status: 0 pass, 1 audit failure, 2 invalid config, 3 runtime error.
// GLAB_THREADS caps the number of concurrent sweep runs.

#include <openssl/evp.h>

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "glab/config.hpp"
#include "glab/runner.hpp"

namespace fs = std::filesystem;
using namespace glab;

namespace {

std::string sha256_hex(const std::string &data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_file(const fs::path &p, const std::string &body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
    out << body;
}

int thread_count() {
    if (const char *s = std::getenv("GLAB_THREADS")) {
        try {
            const int n = std::stoi(s);
            if (n >= 1) {
                return n;
            }
        } catch (const std::exception &) {
        }
        std::cerr << "glab: ignoring invalid GLAB_THREADS=" << s << '\n';
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Writes CSVs, summary.json, and manifest.json; the manifest alone carries timestamps.
void emit(const fs::path &dir, const Json &summary, const std::map<std::string, std::string> &files,
          const Json &inputs) {
    fs::create_directories(dir);
    Json outputs = Json::array();
    auto put = [&](const std::string &name, const std::string &body) {
        write_file(dir / name, body);
        outputs.push_back({{"file", name}, {"sha256", sha256_hex(body)}, {"bytes", body.size()}});
    };
    for (const auto &kv : files) {
        put(kv.first, kv.second);
    }
    put("summary.json", summary.dump(2) + "\n");
    Json manifest{{"tool", "glab"},
                  {"schema_version", kConfigVersion},
                  {"created_utc", utc_now()},
                  {"inputs", inputs},
                  {"outputs", outputs}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

void report(const std::string &label, const RunOutput &r) {
    if (r.exit_code == kExitOk) {
        std::cout << label << ": pass\n";
    } else if (r.exit_code == kExitAudit) {
        std::cout << label << ": audit failed at " << r.failed_anchor() << '\n';
        for (const auto &a : r.audits) {
            if (!a.pass) {
                std::cerr << "  FAIL " << a.name << " [" << a.anchor << "]: " << a.lhs << " > " << a.rhs << " + "
                          << a.slack << '\n';
            }
        }
    } else {
        std::cerr << label << ": " << r.error << '\n';
    }
}

int cmd_run(const std::string &path, const std::string &out_override) {
    std::string text;
    ExperimentConfig c;
    try {
        text = read_text_file(path);
        c = parse_config_text(text);
    } catch (const ValidationError &e) {
        std::cerr << "glab: invalid config: " << e.what() << '\n';
        return kExitInvalid;
    }
    if (!out_override.empty()) {
        c.output_dir = out_override;
    }
    RunOutput r = run_task(c);
    Json inputs = Json::array({{{"file", path}, {"sha256", sha256_hex(text)}}});
    emit(c.output_dir, summary_json(c, r), r.files, inputs);
    report(c.task, r);
    return r.exit_code;
}

int cmd_sweep(const std::string &path, const std::string &axis, const std::vector<double> &values,
              const std::string &out_override) {
    std::string text;
    ExperimentConfig base;
    try {
        text = read_text_file(path);
        base = parse_config_text(text);
    } catch (const ValidationError &e) {
        std::cerr << "glab: invalid config: " << e.what() << '\n';
        return kExitInvalid;
    }
    if (!out_override.empty()) {
        base.output_dir = out_override;
    }
    if (values.empty()) {
        std::cout << "sweep: no values, nothing to do\n";
        return kExitOk;
    }
    if (base.task == "verify-all") {
        std::cerr << "glab: verify-all cannot be swept\n";
        return kExitInvalid;
    }
    const size_t n = values.size();
    std::vector<ExperimentConfig> configs(n, base);
    std::vector<RunOutput> runs(n);
    std::vector<bool> valid(n, false);
    for (size_t k = 0; k < n; ++k) {
        try {
            configs[k] = with_field(base, axis, values[k]);
            configs[k].output_dir = (fs::path(base.output_dir) / ("run_" + std::to_string(k))).string();
            valid[k] = true;
        } catch (const ValidationError &e) {
            runs[k].error = e.what();
            runs[k].exit_code = kExitInvalid;
        }
    }
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t k = next++; k < n; k = next++) {
            if (valid[k]) {
                runs[k] = run_task(configs[k]);
            }
        }
    };
    std::vector<std::thread> pool;
    const size_t threads = std::min<size_t>(n, static_cast<size_t>(thread_count()));
    for (size_t t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto &t : pool) {
        t.join();
    }
    Json inputs = Json::array({{{"file", path}, {"sha256", sha256_hex(text)}}});
    std::set<std::string> metric_names;
    int worst = kExitOk;
    for (size_t k = 0; k < n; ++k) {
        for (const auto &kv : runs[k].metrics) {
            metric_names.insert(kv.first);
        }
        worst = std::max(worst, runs[k].exit_code);
        std::ostringstream label;
        label << axis << '=' << values[k];
        report(label.str(), runs[k]);
        if (valid[k]) {
            emit(configs[k].output_dir, summary_json(configs[k], runs[k]), runs[k].files, inputs);
        }
    }
    std::ostringstream csv;
    csv.precision(12);
    csv << "value,exit_code";
    for (const auto &m : metric_names) {
        csv << ',' << m;
    }
    csv << '\n';
    for (size_t k = 0; k < n; ++k) {
        csv << values[k] << ',' << runs[k].exit_code;
        for (const auto &m : metric_names) {
            auto it = runs[k].metrics.find(m);
            csv << ',';
            if (it != runs[k].metrics.end()) {
                csv << it->second;
            }
        }
        csv << '\n';
    }
    std::vector<double> ok_values;
    std::vector<RunOutput> ok_runs;
    for (size_t k = 0; k < n; ++k) {
        if (runs[k].exit_code == kExitOk || runs[k].exit_code == kExitAudit) {
            ok_values.push_back(values[k]);
            ok_runs.push_back(runs[k]);
        }
    }
    std::ostringstream trends;
    trends.precision(12);
    trends << "metric,log_slope,log_intercept,points\n";
    Json tj = Json::array();
    for (const auto &t : fit_trends(ok_values, ok_runs)) {
        trends << t.metric << ',' << t.slope << ',' << t.intercept << ',' << t.points << '\n';
        tj.push_back({{"metric", t.metric}, {"log_slope", t.slope}, {"log_intercept", t.intercept},
                      {"points", t.points}});
        std::cout << "trend d log(" << t.metric << ")/d " << axis << " = " << t.slope << '\n';
    }
    Json audits = Json::array();
    Json subruns = Json::array();
    for (size_t k = 0; k < n; ++k) {
        for (const auto &a : runs[k].audits) {
            Json aj = audit_json(a);
            aj["value"] = values[k];
            audits.push_back(aj);
        }
        Json s{{"value", values[k]}, {"exit_code", runs[k].exit_code}};
        if (!runs[k].error.empty()) {
            s["error"] = runs[k].error;
        }
        subruns.push_back(s);
    }
    Json summary{{"task", base.task},       {"config", to_json(base)}, {"axis", axis},   {"values", values},
                 {"exit_code", worst},      {"runs", subruns},         {"trends", tj}, {"audits", audits}};
    emit(base.output_dir, summary, {{"sweep.csv", csv.str()}, {"trends.csv", trends.str()}}, inputs);
    return worst;
}

int cmd_verify(bool quick, const std::string &out) {
    std::vector<CriterionResult> results;
    RunOutput r = run_verify_all(quick, 0, &results);
    for (const auto &cr : results) {
        std::cout << describe(cr) << '\n';
    }
    ExperimentConfig c;
    c.task = "verify-all";
    c.params = Json{{"quick", quick}};
    c.output_dir = out;
    emit(out, summary_json(c, r), r.files, Json::array());
    return r.exit_code;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"glab: thermal-state preparation experiments and audits"};
    app.require_subcommand(1);
    std::string config, out, axis;
    std::vector<std::string> value_args;
    bool quick = false;

    auto *run = app.add_subcommand("run", "run one experiment config");
    run->add_option("config", config, "JSON config file")->required();
    run->add_option("--out", out, "override output_dir");

    auto *sweep = app.add_subcommand("sweep", "run a config once per value of a numeric field");
    sweep->add_option("config", config, "JSON config file")->required();
    sweep->add_option("--axis", axis, "seed, model.<key>, or params.<key>")->required();
    sweep->add_option("--values", value_args, "values to sweep")->expected(0, -1);
    sweep->add_option("--out", out, "override output_dir");

    auto *verify = app.add_subcommand("verify-all", "run every acceptance criterion");
    verify->add_flag("--quick", quick, "reduced sizes");
    verify->add_option("--out", out, "output directory (default glab-verify)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    try {
        if (*run) {
            return cmd_run(config, out);
        }
        if (*sweep) {
            // A bare --values yields one empty token.
            std::vector<double> values;
            for (const auto &v : value_args) {
                if (v.empty()) {
                    continue;
                }
                size_t used = 0;
                double x = 0.0;
                try {
                    x = std::stod(v, &used);
                } catch (const std::exception &) {
                    used = 0;
                }
                if (used != v.size()) {
                    std::cerr << "glab: --values entry '" << v << "' is not a number\n";
                    return kExitInvalid;
                }
                values.push_back(x);
            }
            return cmd_sweep(config, axis, values, out);
        }
        return cmd_verify(quick, out.empty() ? "glab-verify" : out);
    } catch (const std::exception &e) {
        std::cerr << "glab: " << e.what() << '\n';
        return kExitError;
    }
}
