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

// Versioned JSON experiment configuration. Every object level rejects unknown
// keys; validation failures throw ValidationError.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "glab/errors.hpp"
#include "glab/model.hpp"
#include "json.hpp"

namespace glab {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

enum class ParamKind { Int, NonNegInt, PosInt, Real, NonNegReal, PosReal, RealList, IntList, Bool, Quadrature };

struct ParamSpec {
    ParamKind kind;
    std::string help;
};

inline const std::vector<std::string> &task_names() {
    static const std::vector<std::string> names = {"gibbs",  "cluster", "cmi",    "connect",
                                                   "lindblad-flow", "toric", "memory", "verify-all"};
    return names;
}

// Parameters accepted by each task. Defaults live with the task runners.
inline const std::map<std::string, ParamSpec> &task_params(const std::string &task) {
    using K = ParamKind;
    static const std::map<std::string, std::map<std::string, ParamSpec>> table = {
        {"gibbs", {{"beta", {K::Real, "uniform coupling scale"}}}},
        {"cluster",
         {{"beta", {K::Real, "uniform coupling scale"}},
          {"center", {K::NonNegInt, "center site of A"}},
          {"r_a", {K::NonNegInt, "radius of A"}},
          {"max_shell", {K::PosInt, "largest buffer radius"}},
          {"algebra", {K::Bool, "restrict observables to the local algebras"}}}},
        {"cmi",
         {{"beta", {K::Real, "uniform coupling scale"}},
          {"center", {K::NonNegInt, "center site of A"}},
          {"r_a", {K::NonNegInt, "radius of A"}},
          {"r_1", {K::NonNegInt, "inner buffer width"}},
          {"r_2", {K::NonNegInt, "outer buffer width"}}}},
        {"connect",
         {{"beta_from", {K::Real, "start scale"}},
          {"beta_to", {K::Real, "end scale"}},
          {"delta", {K::PosReal, "path step in sup norm"}},
          {"r_a", {K::PosInt, "block half-width"}},
          {"r_1", {K::NonNegInt, "inner buffer width"}},
          {"r_2", {K::NonNegInt, "outer buffer width"}},
          {"radius", {K::NonNegInt, "sets r_1 and r_2 together"}},
          {"quadrature", {K::Quadrature, "trapezoid or single"}},
          {"quad_window", {K::PosReal, "trapezoid half-window"}},
          {"quad_nodes", {K::PosInt, "trapezoid node count"}}}},
        {"lindblad-flow",
         {{"beta_from", {K::Real, "start scale"}},
          {"beta_to", {K::Real, "end scale"}},
          {"r", {K::NonNegInt, "flow radius"}},
          {"points", {K::PosInt, "pointwise checks along the path"}},
          {"steps", {K::PosInt, "initial integration steps"}},
          {"tolerance", {K::PosReal, "step-doubling tolerance"}}}},
        {"toric",
         {{"beta", {K::Real, "uniform coupling scale"}},
          {"beta0", {K::PosReal, "reference scale for the ground-state distance"}},
          {"loop_a", {K::IntList, "plaquette term indices inside the inner loop"}},
          {"loop_b", {K::IntList, "plaquette term indices inside the outer loop"}}}},
        {"memory",
         {{"target_scale", {K::Real, "target couplings as a multiple of the model's"}},
          {"ground_eps", {K::PosReal, "ground-state substitution accuracy"}},
          {"delta", {K::PosReal, "encoder path step"}},
          {"r_a", {K::PosInt, "block half-width"}},
          {"r_1", {K::NonNegInt, "inner buffer width"}},
          {"r_2", {K::NonNegInt, "outer buffer width"}},
          {"block", {K::PosInt, "heat-bath block size"}},
          {"rate", {K::PosReal, "heat-bath rate"}},
          {"times", {K::RealList, "evolution times"}}}},
        {"verify-all", {{"quick", {K::Bool, "reduced sizes"}}}},
    };
    auto it = table.find(task);
    if (it == table.end()) {
        throw ValidationError("unknown task '" + task + "'");
    }
    return it->second;
}

struct ExperimentConfig {
    int version = kConfigVersion;
    std::string task;
    Json model = Json::object();
    Json params = Json::object();
    uint64_t seed = 0;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig &o) const {
        return version == o.version && task == o.task && model == o.model && params == o.params &&
               seed == o.seed && output_dir == o.output_dir;
    }

    template <class T>
    T param(const std::string &key, T fallback) const {
        return params.contains(key) ? params.at(key).get<T>() : fallback;
    }
};

namespace config_detail {

inline void only_keys(const Json &j, const std::set<std::string> &allowed, const std::string &where) {
    if (!j.is_object()) {
        throw ValidationError(where + " must be an object");
    }
    for (const auto &item : j.items()) {
        if (!allowed.count(item.key())) {
            throw ValidationError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

inline const Json &need(const Json &j, const std::string &key, const std::string &where) {
    if (!j.contains(key)) {
        throw ValidationError("missing key '" + key + "' in " + where);
    }
    return j.at(key);
}

inline int as_int(const Json &v, const std::string &name, int lo) {
    if (!v.is_number_integer()) {
        throw ValidationError(name + " must be an integer");
    }
    const int64_t x = v.get<int64_t>();
    if (x < lo || x > (int64_t{1} << 30)) {
        throw ValidationError(name + " must be at least " + std::to_string(lo));
    }
    return static_cast<int>(x);
}

inline double as_real(const Json &v, const std::string &name) {
    if (!v.is_number()) {
        throw ValidationError(name + " must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ValidationError(name + " must be finite");
    }
    return x;
}

inline bool as_bool(const Json &v, const std::string &name) {
    if (!v.is_boolean()) {
        throw ValidationError(name + " must be a boolean");
    }
    return v.get<bool>();
}

inline void check_param(const std::string &key, const ParamSpec &spec, const Json &v) {
    const std::string name = "params." + key;
    switch (spec.kind) {
        case ParamKind::Int:
            as_int(v, name, -(1 << 30));
            break;
        case ParamKind::NonNegInt:
            as_int(v, name, 0);
            break;
        case ParamKind::PosInt:
            as_int(v, name, 1);
            break;
        case ParamKind::Real:
            as_real(v, name);
            break;
        case ParamKind::NonNegReal:
            if (as_real(v, name) < 0) {
                throw ValidationError(name + " must be nonnegative");
            }
            break;
        case ParamKind::PosReal:
            if (as_real(v, name) <= 0) {
                throw ValidationError(name + " must be positive");
            }
            break;
        case ParamKind::RealList:
            if (!v.is_array() || v.empty()) {
                throw ValidationError(name + " must be a nonempty array");
            }
            for (const auto &x : v) {
                if (as_real(x, name) < 0) {
                    throw ValidationError(name + " entries must be nonnegative");
                }
            }
            break;
        case ParamKind::IntList:
            if (!v.is_array() || v.empty()) {
                throw ValidationError(name + " must be a nonempty array");
            }
            for (const auto &x : v) {
                as_int(x, name, 0);
            }
            break;
        case ParamKind::Bool:
            as_bool(v, name);
            break;
        case ParamKind::Quadrature:
            if (!v.is_string() || (v != "trapezoid" && v != "single")) {
                throw ValidationError(name + " must be \"trapezoid\" or \"single\"");
            }
            break;
    }
}

inline std::vector<int> int_list(const Json &v) {
    std::vector<int> out;
    for (const auto &x : v) {
        out.push_back(x.get<int>());
    }
    return out;
}

// Row-major complex entries as [re, im] pairs.
inline Mat parse_matrix(const Json &v, size_t dim, const std::string &where) {
    if (!v.is_array() || v.size() != dim * dim) {
        throw ValidationError(where + " must hold " + std::to_string(dim * dim) + " [re, im] pairs");
    }
    Mat m(dim, dim);
    for (size_t k = 0; k < dim * dim; ++k) {
        const Json &e = v.at(k);
        if (!e.is_array() || e.size() != 2) {
            throw ValidationError(where + " entries must be [re, im] pairs");
        }
        m(k / dim, k % dim) = cplx(as_real(e[0], where), as_real(e[1], where));
    }
    return m;
}

inline InteractionFamily custom_family(const Json &m) {
    only_keys(m, {"family", "lattice", "range", "terms"}, "model");
    const Json &lat = need(m, "lattice", "model");
    only_keys(lat, {"extents", "periodic"}, "model.lattice");
    const Json &ext = need(lat, "extents", "model.lattice");
    const Json &per = need(lat, "periodic", "model.lattice");
    if (!ext.is_array() || ext.empty() || !per.is_array() || per.size() != ext.size()) {
        throw ValidationError("model.lattice needs matching extents and periodic arrays");
    }
    std::vector<int> extents;
    std::vector<bool> periodic;
    for (size_t k = 0; k < ext.size(); ++k) {
        extents.push_back(as_int(ext[k], "model.lattice.extents", 1));
        periodic.push_back(as_bool(per[k], "model.lattice.periodic"));
    }
    InteractionFamily f;
    f.lattice = Lattice(extents, periodic);
    f.range = m.contains("range") ? as_int(m.at("range"), "model.range", 0) : 0;
    const Json &terms = need(m, "terms", "model");
    if (!terms.is_array()) {
        throw ValidationError("model.terms must be an array");
    }
    for (size_t k = 0; k < terms.size(); ++k) {
        const std::string where = "model.terms[" + std::to_string(k) + "]";
        const Json &t = terms[k];
        only_keys(t, {"support", "matrix", "beta", "name"}, where);
        const Json &sup = need(t, "support", where);
        if (!sup.is_array() || sup.empty()) {
            throw ValidationError(where + ".support must be a nonempty array");
        }
        Term term;
        for (const auto &s : sup) {
            term.support.push_back(as_int(s, where + ".support", 0));
        }
        if (term.support.size() > 6) {
            throw ValidationError(where + " acts on more than 6 sites");
        }
        term.h = parse_matrix(need(t, "matrix", where), dim_of(term.support.size()), where + ".matrix");
        term.beta = t.contains("beta") ? as_real(t.at("beta"), where + ".beta") : 1.0;
        if (t.contains("name")) {
            if (!t.at("name").is_string()) {
                throw ValidationError(where + ".name must be a string");
            }
            term.name = t.at("name").get<std::string>();
        } else {
            term.name = "T" + std::to_string(k);
        }
        f.terms.push_back(std::move(term));
    }
    f.validate();
    return f;
}

}  // namespace config_detail

// Builds the interaction family named by a model block.
inline InteractionFamily build_model(const Json &m) {
    using namespace config_detail;
    if (!m.is_object()) {
        throw ValidationError("model must be an object");
    }
    const Json &fam = need(m, "family", "model");
    if (!fam.is_string()) {
        throw ValidationError("model.family must be a string");
    }
    const std::string family = fam.get<std::string>();
    try {
        auto real = [&](const char *key, double fallback) {
            return m.contains(key) ? as_real(m.at(key), std::string("model.") + key) : fallback;
        };
        auto flag = [&](const char *key, bool fallback) {
            return m.contains(key) ? as_bool(m.at(key), std::string("model.") + key) : fallback;
        };
        auto sites = [&]() { return as_int(need(m, "sites", "model"), "model.sites", 2); };
        if (family == "ising_chain") {
            only_keys(m, {"family", "sites", "periodic", "beta_j", "beta_h"}, "model");
            return ising_chain(sites(), real("beta_j", 1.0), real("beta_h", 0.0), flag("periodic", false));
        }
        if (family == "tfim_chain") {
            only_keys(m, {"family", "sites", "periodic", "beta_j", "beta_g"}, "model");
            return tfim_chain(sites(), real("beta_j", 1.0), real("beta_g", 1.0), flag("periodic", false));
        }
        if (family == "heisenberg_chain") {
            only_keys(m, {"family", "sites", "periodic", "beta_j"}, "model");
            return heisenberg_chain(sites(), real("beta_j", 1.0), flag("periodic", false));
        }
        if (family == "toric2d") {
            only_keys(m, {"family", "lx", "ly", "beta_plaquette", "beta_star", "independent"}, "model");
            return toric2d(as_int(need(m, "lx", "model"), "model.lx", 2), as_int(need(m, "ly", "model"), "model.ly", 2),
                           real("beta_plaquette", 1.0), real("beta_star", 1.0), flag("independent", true));
        }
        if (family == "custom") {
            return custom_family(m);
        }
    } catch (const ValidationError &) {
        throw;
    } catch (const Error &e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    throw ValidationError("unknown model family '" + family + "'");
}

inline ExperimentConfig parse_config(const Json &j) {
    using namespace config_detail;
    only_keys(j, {"version", "task", "model", "params", "seed", "output_dir"}, "config");
    ExperimentConfig c;
    c.version = as_int(need(j, "version", "config"), "version", 0);
    if (c.version != kConfigVersion) {
        throw ValidationError("unsupported config version " + std::to_string(c.version));
    }
    const Json &task = need(j, "task", "config");
    if (!task.is_string()) {
        throw ValidationError("task must be a string");
    }
    c.task = task.get<std::string>();
    const auto &spec = task_params(c.task);
    if (j.contains("params")) {
        c.params = j.at("params");
        std::set<std::string> allowed;
        for (const auto &kv : spec) {
            allowed.insert(kv.first);
        }
        only_keys(c.params, allowed, "params");
        for (const auto &item : c.params.items()) {
            check_param(item.key(), spec.at(item.key()), item.value());
        }
    }
    if (j.contains("model")) {
        c.model = j.at("model");
        build_model(c.model);
    } else if (c.task != "verify-all") {
        throw ValidationError("missing key 'model' in config");
    }
    if (j.contains("seed")) {
        const Json &s = j.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<int64_t>() >= 0)) {
            throw ValidationError("seed must be a nonnegative integer");
        }
        c.seed = s.get<uint64_t>();
    }
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string() || j.at("output_dir").get<std::string>().empty()) {
            throw ValidationError("output_dir must be a nonempty string");
        }
        c.output_dir = j.at("output_dir").get<std::string>();
    }
    return c;
}

inline Json to_json(const ExperimentConfig &c) {
    Json j = Json::object();
    j["version"] = c.version;
    j["task"] = c.task;
    if (!c.model.empty()) {
        j["model"] = c.model;
    }
    if (!c.params.empty()) {
        j["params"] = c.params;
    }
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

inline ExperimentConfig parse_config_text(const std::string &text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot read " + path);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline ExperimentConfig load_config(const std::string &path) {
    return parse_config_text(read_text_file(path));
}

// Sets a numeric field addressed by a dotted path ("params.r_1", "model.beta_j", "seed").
inline ExperimentConfig with_field(const ExperimentConfig &c, const std::string &axis, double value) {
    Json j = to_json(c);
    std::string pointer = "/";
    for (char ch : axis) {
        pointer += ch == '.' ? '/' : ch;
    }
    Json::json_pointer ptr(pointer);
    const bool integral = std::floor(value) == value && std::abs(value) < 1e15;
    const std::string head = axis.substr(0, axis.find('.'));
    if (head == "params") {
        const std::string key = axis.substr(axis.find('.') + 1);
        const auto &spec = task_params(c.task);
        auto it = spec.find(key);
        if (it == spec.end()) {
            throw ValidationError("axis " + axis + " is not a parameter of task " + c.task);
        }
        const ParamKind k = it->second.kind;
        if (k == ParamKind::RealList || k == ParamKind::IntList || k == ParamKind::Bool ||
            k == ParamKind::Quadrature) {
            throw ValidationError("axis " + axis + " is not numeric");
        }
        const bool int_kind = k == ParamKind::Int || k == ParamKind::NonNegInt || k == ParamKind::PosInt;
        if (int_kind && integral) {
            j[ptr] = static_cast<int64_t>(value);
        } else {
            j[ptr] = value;
        }
    } else if (head == "model" || axis == "seed") {
        if (axis != "seed" && !j.contains(ptr)) {
            throw ValidationError("axis " + axis + " is not set in the config");
        }
        const Json &old = j.contains(ptr) ? j.at(ptr) : Json(0);
        if (!old.is_number()) {
            throw ValidationError("axis " + axis + " is not numeric");
        }
        if (old.is_number_integer() && integral) {
            j[ptr] = static_cast<int64_t>(value);
        } else {
            j[ptr] = value;
        }
    } else {
        throw ValidationError("axis " + axis + " must be seed, model.<key>, or params.<key>");
    }
    return parse_config(j);
}

}  // namespace glab
