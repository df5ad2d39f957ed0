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

#include <gtest/gtest.h>
#include <openssl/sha.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "glab/config.hpp"
#include "glab/runner.hpp"

using namespace glab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    fs::path p = fs::path(testing::TempDir()) / ("glab_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path &dir, const Json &j) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string(GLAB_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string sha256_hex(const std::string &data) {
    unsigned char md[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char *>(data.data()), data.size(), md);
    std::ostringstream os;
    for (unsigned char c : md) {
        os << std::hex << (c >> 4) << (c & 15);
    }
    return os.str();
}

Json gibbs_config(const fs::path &out) {
    return Json{{"version", 1},
                {"task", "gibbs"},
                {"model", {{"family", "ising_chain"}, {"sites", 4}, {"periodic", true}, {"beta_j", 0.7}}},
                {"params", {{"beta", 1.0}}},
                {"seed", 3},
                {"output_dir", out.string()}};
}

Json pauli_pairs(const Mat &m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out.push_back({m(r, c).real(), m(r, c).imag()});
        }
    }
    return out;
}

// Custom open chain with a single term.
Json custom_model(std::vector<int> extents, std::vector<int> support, Json matrix) {
    Json term = Json::object();
    term["support"] = support;
    term["matrix"] = std::move(matrix);
    term["beta"] = 0.4;
    Json lattice = Json::object();
    lattice["extents"] = extents;
    lattice["periodic"] = std::vector<bool>(extents.size(), false);
    Json m = Json::object();
    m["family"] = "custom";
    m["lattice"] = lattice;
    m["terms"] = Json::array({term});
    return m;
}

}  // namespace

TEST(config, round_trip_is_stable) {
    std::vector<Json> models = {
        {{"family", "ising_chain"}, {"sites", 6}, {"periodic", true}, {"beta_j", 0.5}, {"beta_h", 0.25}},
        {{"family", "tfim_chain"}, {"sites", 5}, {"beta_g", 0.3}},
        {{"family", "heisenberg_chain"}, {"sites", 4}, {"periodic", false}},
        {{"family", "toric2d"}, {"lx", 2}, {"ly", 2}, {"independent", true}},
        custom_model({3}, {0, 1}, pauli_pairs(-pauli_string("ZZ"))),
    };
    for (const auto &m : models) {
        Json j{{"version", 1}, {"task", "connect"}, {"model", m}, {"params", {{"r_1", 2}, {"delta", 0.2}}},
               {"seed", 9}};
        ExperimentConfig a = parse_config(j);
        ExperimentConfig b = parse_config(to_json(a));
        EXPECT_EQ(a, b);
        EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    }
}

TEST(config, unknown_keys_rejected_at_every_level) {
    Json good = gibbs_config("x");
    EXPECT_NO_THROW(parse_config(good));
    Json top = good;
    top["colour"] = 1;
    EXPECT_THROW(parse_config(top), ValidationError);
    Json model = good;
    model["model"]["spin"] = 1;
    EXPECT_THROW(parse_config(model), ValidationError);
    Json params = good;
    params["params"]["r_1"] = 1;  // not a gibbs parameter
    EXPECT_THROW(parse_config(params), ValidationError);
    Json version = good;
    version["version"] = 2;
    EXPECT_THROW(parse_config(version), ValidationError);
    EXPECT_THROW(parse_config_text("{not json"), ValidationError);
}

TEST(config, invalid_values_rejected) {
    Json j{{"version", 1}, {"task", "connect"}, {"model", {{"family", "tfim_chain"}, {"sites", 4}}}};
    j["params"] = {{"r_1", -1}};
    EXPECT_THROW(parse_config(j), ValidationError);
    j["params"] = {{"delta", 0.0}};
    EXPECT_THROW(parse_config(j), ValidationError);
    j["params"] = {{"quadrature", "simpson"}};
    EXPECT_THROW(parse_config(j), ValidationError);
    j["params"] = {{"r_a", 1.5}};
    EXPECT_THROW(parse_config(j), ValidationError);
    Json m = j;
    m.erase("params");
    m["model"] = custom_model({2}, {0}, Json::parse("[[0,0],[1,0],[0,0],[0,0]]"));
    EXPECT_THROW(parse_config(m), ValidationError);  // not Hermitian
    m["model"]["terms"][0]["matrix"] = Json::parse("[[0,0],[2,0],[2,0],[0,0]]");
    EXPECT_THROW(parse_config(m), ValidationError);  // norm above 1
    m["model"]["terms"][0]["support"] = Json::array({5});
    EXPECT_THROW(parse_config(m), ValidationError);
    Json missing{{"version", 1}, {"task", "gibbs"}};
    EXPECT_THROW(parse_config(missing), ValidationError);
    Json verify{{"version", 1}, {"task", "verify-all"}, {"params", {{"quick", true}}}};
    EXPECT_NO_THROW(parse_config(verify));
}

TEST(config, sweep_axis_must_be_numeric) {
    ExperimentConfig c = parse_config(
        Json{{"version", 1}, {"task", "connect"}, {"model", {{"family", "tfim_chain"}, {"sites", 4}}}});
    EXPECT_EQ(with_field(c, "params.r_1", 2).params.at("r_1"), 2);
    EXPECT_DOUBLE_EQ(with_field(c, "params.delta", 0.25).params.at("delta").get<double>(), 0.25);
    EXPECT_EQ(with_field(c, "seed", 7).seed, 7u);
    EXPECT_THROW(with_field(c, "params.quadrature", 1), ValidationError);
    EXPECT_THROW(with_field(c, "params.r_1", -1), ValidationError);
    EXPECT_THROW(with_field(c, "params.nope", 1), ValidationError);
    EXPECT_THROW(with_field(c, "model.beta_h", 1), ValidationError);  // not set, and not a tfim key
    EXPECT_THROW(with_field(c, "output_dir", 1), ValidationError);
}

TEST(runner, gibbs_task_matches_direct_evaluation) {
    ExperimentConfig c = parse_config(gibbs_config("x"));
    RunOutput r = run_task(c);
    ASSERT_EQ(r.exit_code, kExitOk) << r.error;
    // Periodic Ising ring: energy is -J * 4 * <ZZ>, <ZZ> = (t + t^3) / (1 + t^4) for a 4-ring.
    const double t = std::tanh(0.7);
    const double zz = (t + t * t * t) / (1 + t * t * t * t);
    EXPECT_NEAR(r.metrics.at("energy"), -0.7 * 4 * zz, 1e-12);
    EXPECT_NE(r.files.at("gibbs.csv").find("site,x,y,z"), std::string::npos);
}

TEST(runner, commuting_cmi_vanishes) {
    Json j{{"version", 1},
           {"task", "cmi"},
           {"model", {{"family", "ising_chain"}, {"sites", 7}, {"beta_j", 0.8}, {"beta_h", 0.3}}},
           {"params", {{"center", 3}, {"r_a", 1}, {"r_1", 1}, {"r_2", 0}}}};
    RunOutput r = run_task(parse_config(j));
    ASSERT_EQ(r.exit_code, kExitOk) << r.error;
    EXPECT_LT(r.metrics.at("cmi_bits"), 1e-9);
    EXPECT_LT(r.metrics.at("petz_error"), 1e-8);
}

TEST(runner, geometry_errors_map_to_runtime_exit) {
    Json j{{"version", 1},
           {"task", "cmi"},
           {"model", {{"family", "ising_chain"}, {"sites", 4}, {"periodic", true}}},
           {"params", {{"r_a", 1}, {"r_1", 1}, {"r_2", 1}}}};
    RunOutput r = run_task(parse_config(j));
    EXPECT_EQ(r.exit_code, kExitError);
    EXPECT_FALSE(r.error.empty());
}

TEST(runner, every_audit_carries_an_anchor) {
    Json j{{"version", 1},
           {"task", "toric"},
           {"model", {{"family", "toric2d"}, {"lx", 2}, {"ly", 2}}},
           {"params", {{"beta", 0.8}, {"beta0", 3.0}}}};
    RunOutput r = run_task(parse_config(j));
    ASSERT_EQ(r.exit_code, kExitOk) << r.error;
    ASSERT_FALSE(r.audits.empty());
    for (const auto &a : r.audits) {
        EXPECT_FALSE(a.anchor.empty()) << a.name;
    }
    Json s = summary_json(parse_config(j), r);
    for (const auto &a : s.at("audits")) {
        for (const char *k : {"name", "lhs", "rhs", "slack", "pass", "anchor"}) {
            EXPECT_TRUE(a.contains(k)) << k;
        }
    }
}

TEST(runner, trends_fit_log_slope) {
    std::vector<RunOutput> runs(3);
    for (int k = 0; k < 3; ++k) {
        runs[k].metrics["err"] = std::exp(-2.0 * k + 1.0);
        runs[k].metrics["zero"] = 0.0;
    }
    std::vector<Trend> t = fit_trends({0, 1, 2}, runs);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].metric, "err");
    EXPECT_NEAR(t[0].slope, -2.0, 1e-12);
    EXPECT_NEAR(t[0].intercept, 1.0, 1e-12);
}

TEST(cli, run_writes_summary_csv_and_manifest) {
    fs::path dir = scratch("run");
    fs::path cfg = write_config(dir, gibbs_config(dir / "out"));
    ASSERT_EQ(run_cli("run " + cfg.string()), 0);
    for (const char *f : {"gibbs.csv", "summary.json", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    }
    Json manifest = Json::parse(read_text_file((dir / "out" / "manifest.json").string()));
    EXPECT_EQ(manifest.at("inputs")[0].at("sha256"), sha256_hex(read_text_file(cfg.string())));
    for (const auto &o : manifest.at("outputs")) {
        const std::string body = read_text_file((dir / "out" / o.at("file").get<std::string>()).string());
        EXPECT_EQ(o.at("sha256"), sha256_hex(body)) << o.at("file");
    }
    Json summary = Json::parse(read_text_file((dir / "out" / "summary.json").string()));
    EXPECT_EQ(summary.at("status"), "pass");
    EXPECT_EQ(parse_config(summary.at("config")), parse_config(gibbs_config(dir / "out")));
}

TEST(cli, identical_configs_give_identical_csv) {
    fs::path dir = scratch("determinism");
    Json j{{"version", 1},
           {"task", "cluster"},
           {"model", {{"family", "tfim_chain"}, {"sites", 6}, {"beta_j", 0.4}, {"beta_g", 0.4}}},
           {"params", {{"center", 0}, {"max_shell", 3}}},
           {"seed", 5}};
    j["output_dir"] = (dir / "a").string();
    fs::path ca = dir / "a.json";
    std::ofstream(ca) << j.dump();
    j["output_dir"] = (dir / "b").string();
    fs::path cb = dir / "b.json";
    std::ofstream(cb) << j.dump();
    ASSERT_EQ(run_cli("run " + ca.string()), 0);
    ASSERT_EQ(run_cli("run " + cb.string()), 0);
    EXPECT_EQ(read_text_file((dir / "a" / "cluster.csv").string()),
              read_text_file((dir / "b" / "cluster.csv").string()));
}

TEST(cli, invalid_config_exits_two) {
    fs::path dir = scratch("invalid");
    Json j{{"version", 1},
           {"task", "connect"},
           {"model", {{"family", "tfim_chain"}, {"sites", 4}}},
           {"params", {{"r_1", -1}}},
           {"output_dir", (dir / "out").string()}};
    EXPECT_EQ(run_cli("run " + write_config(dir, j).string()), 2);
    EXPECT_FALSE(fs::exists(dir / "out"));
    EXPECT_EQ(run_cli("run " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
}

TEST(cli, empty_sweep_is_a_no_op) {
    fs::path dir = scratch("empty_sweep");
    fs::path cfg = write_config(dir, gibbs_config(dir / "out"));
    EXPECT_EQ(run_cli("sweep " + cfg.string() + " --axis params.beta --values"), 0);
    EXPECT_EQ(run_cli("sweep " + cfg.string() + " --axis params.beta"), 0);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(cli, temperature_sweep_reports_correlation_length) {
    fs::path dir = scratch("xi");
    Json j{{"version", 1},
           {"task", "cluster"},
           {"model", {{"family", "tfim_chain"}, {"sites", 6}, {"beta_j", 1.0}, {"beta_g", 1.0}}},
           {"params", {{"center", 0}, {"max_shell", 3}}},
           {"output_dir", (dir / "out").string()}};
    fs::path cfg = write_config(dir, j);
    ASSERT_EQ(run_cli("sweep " + cfg.string() + " --axis params.beta --values 0.1 0.4 0.7 1.0"), 0);
    std::istringstream csv(read_text_file((dir / "out" / "sweep.csv").string()));
    std::string header, line;
    std::getline(csv, header);
    EXPECT_NE(header.find("xi"), std::string::npos);
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 4);
    Json summary = Json::parse(read_text_file((dir / "out" / "summary.json").string()));
    bool found = false;
    for (const auto &t : summary.at("trends")) {
        if (t.at("metric") == "xi") {
            found = true;
            EXPECT_GT(t.at("log_slope").get<double>(), 0.0);  // xi grows with beta
        }
    }
    EXPECT_TRUE(found);
}

TEST(cli, radius_sweep_on_connect_has_negative_slope) {
    fs::path dir = scratch("radius");
    Json j{{"version", 1},
           {"task", "connect"},
           {"model", {{"family", "tfim_chain"}, {"sites", 6}, {"beta_j", 1.0}, {"beta_g", 1.0}}},
           {"params", {{"beta_from", 0.2}, {"beta_to", 0.4}, {"delta", 0.2}}},
           {"output_dir", (dir / "out").string()}};
    fs::path cfg = write_config(dir, j);
    ASSERT_EQ(run_cli("sweep " + cfg.string() + " --axis params.radius --values 1 2 3"), 0);
    Json summary = Json::parse(read_text_file((dir / "out" / "summary.json").string()));
    bool found = false;
    for (const auto &t : summary.at("trends")) {
        if (t.at("metric") == "eps_c") {
            found = true;
            EXPECT_LT(t.at("log_slope").get<double>(), 0.0);
        }
    }
    EXPECT_TRUE(found);
    for (const char *f : {"sweep.csv", "trends.csv", "manifest.json", "run_0/ledger.csv", "run_2/summary.json"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    }
}

TEST(cli, sweep_records_invalid_values_and_continues) {
    fs::path dir = scratch("bad_value");
    Json j{{"version", 1},
           {"task", "cmi"},
           {"model", {{"family", "ising_chain"}, {"sites", 6}}},
           {"params", {{"center", 2}, {"r_a", 0}, {"r_1", 1}, {"r_2", 0}}},
           {"output_dir", (dir / "out").string()}};
    fs::path cfg = write_config(dir, j);
    EXPECT_EQ(run_cli("sweep " + cfg.string() + " --axis params.r_1 --values 1 -1 0"), 2);
    Json summary = Json::parse(read_text_file((dir / "out" / "summary.json").string()));
    ASSERT_EQ(summary.at("runs").size(), 3u);
    EXPECT_EQ(summary.at("runs")[0].at("exit_code"), 0);
    EXPECT_EQ(summary.at("runs")[1].at("exit_code"), 2);
    EXPECT_EQ(summary.at("runs")[2].at("exit_code"), 0);
}
