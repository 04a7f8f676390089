#include "fcsim/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fcsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::invalid_argument("scenario: " + path + ": " + why);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown field");
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "must be a number");
    return v.get<double>();
}

long as_long(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "must be an integer");
    return v.get<long>();
}

int as_int(const json& v, const std::string& path) { return static_cast<int>(as_long(v, path)); }

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<long long>() < 0))
        fail(path, "must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "must be a string");
    return v.get<std::string>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "must be an array of numbers");
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = as_double(v[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
}

TaskSpec parse_task(const json& t, const std::string& path) {
    if (!t.is_object()) fail(path, "must be an object");
    check_keys(t, path,
               {"id", "wcet_est", "exec_factor", "rate_init", "rate_min", "rate_max", "criticality",
                "home_proc", "replica_procs"});
    TaskSpec task;
    task.id = as_string(require(t, path, "id"), path + ".id");
    task.wcet_est = as_double(require(t, path, "wcet_est"), path + ".wcet_est");
    task.rate_init = as_double(require(t, path, "rate_init"), path + ".rate_init");
    task.home_proc = as_int(require(t, path, "home_proc"), path + ".home_proc");
    if (t.contains("exec_factor")) task.exec_factor = as_double(t["exec_factor"], path + ".exec_factor");
    if (t.contains("rate_min")) task.rate_min = as_double(t["rate_min"], path + ".rate_min");
    if (t.contains("rate_max")) task.rate_max = as_double(t["rate_max"], path + ".rate_max");
    if (t.contains("criticality")) {
        const std::string c = as_string(t["criticality"], path + ".criticality");
        if (c == "safety_critical") {
            task.criticality = Criticality::SafetyCritical;
        } else if (c == "non_critical") {
            task.criticality = Criticality::NonCritical;
        } else {
            fail(path + ".criticality", "must be \"safety_critical\" or \"non_critical\"");
        }
    }
    if (t.contains("replica_procs")) {
        const json& arr = t["replica_procs"];
        if (!arr.is_array()) fail(path + ".replica_procs", "must be an array of processor indices");
        for (size_t i = 0; i < arr.size(); ++i) {
            task.replica_procs.push_back(
                as_int(arr[i], path + ".replica_procs[" + std::to_string(i) + "]"));
        }
    }
    return task;
}

int resolve_task_ref(const json& v, const std::string& path, const SystemTopology& topo) {
    if (v.is_string()) {
        const std::string id = v.get<std::string>();
        for (size_t j = 0; j < topo.tasks.size(); ++j) {
            if (topo.tasks[j].id == id) return static_cast<int>(j);
        }
        fail(path, "no task with id \"" + id + "\"");
    }
    return as_int(v, path);
}

}  // namespace

Scenario load_scenario_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("$", "document must be a JSON object");
    check_keys(doc, "$", {"schema_version", "name", "topology", "loop", "faults", "load_schedule"});

    const long version = as_long(require(doc, "$", "schema_version"), "schema_version");
    if (version != 1) fail("schema_version", "unsupported version " + std::to_string(version));

    Scenario sc;
    sc.name = as_string(require(doc, "$", "name"), "name");

    const json& topo_j = require(doc, "$", "topology");
    if (!topo_j.is_object()) fail("topology", "must be an object");
    check_keys(topo_j, "topology", {"n_procs", "sample_period", "tasks"});
    SystemTopology& topo = sc.loop.topo;
    topo.n_procs = as_int(require(topo_j, "topology", "n_procs"), "topology.n_procs");
    if (topo_j.contains("sample_period"))
        topo.sample_period = as_double(topo_j["sample_period"], "topology.sample_period");
    const json& tasks_j = require(topo_j, "topology", "tasks");
    if (!tasks_j.is_array() || tasks_j.empty()) fail("topology.tasks", "must be a non-empty array");
    for (size_t i = 0; i < tasks_j.size(); ++i) {
        topo.tasks.push_back(parse_task(tasks_j[i], "topology.tasks[" + std::to_string(i) + "]"));
    }

    if (doc.contains("loop")) {
        const json& lp = doc["loop"];
        if (!lp.is_object()) fail("loop", "must be an object");
        check_keys(lp, "loop",
                   {"n_steps", "warmup_steps", "dither_amplitude", "set_point", "miss_ref", "rls",
                    "estimator_init", "v_diag", "q_diag", "du_frac", "noise_band", "seed"});
        LoopConfig& cfg = sc.loop;
        if (lp.contains("n_steps")) cfg.n_steps = as_long(lp["n_steps"], "loop.n_steps");
        if (lp.contains("warmup_steps"))
            cfg.warmup_steps = as_int(lp["warmup_steps"], "loop.warmup_steps");
        if (lp.contains("dither_amplitude"))
            cfg.dither_amplitude = as_double(lp["dither_amplitude"], "loop.dither_amplitude");
        if (lp.contains("set_point")) cfg.set_point = as_double(lp["set_point"], "loop.set_point");
        if (lp.contains("miss_ref")) cfg.miss_ref = as_double(lp["miss_ref"], "loop.miss_ref");
        if (lp.contains("rls")) {
            const json& rls = lp["rls"];
            if (!rls.is_object()) fail("loop.rls", "must be an object");
            check_keys(rls, "loop.rls", {"order", "lambda", "p0", "p_max"});
            if (rls.contains("order")) cfg.rls.order = as_int(rls["order"], "loop.rls.order");
            if (rls.contains("lambda")) cfg.rls.lambda = as_double(rls["lambda"], "loop.rls.lambda");
            if (rls.contains("p0")) cfg.rls.p0 = as_double(rls["p0"], "loop.rls.p0");
            if (rls.contains("p_max")) cfg.rls.p_max = as_double(rls["p_max"], "loop.rls.p_max");
        }
        if (lp.contains("estimator_init")) {
            const std::string mode = as_string(lp["estimator_init"], "loop.estimator_init");
            if (mode == "zero") {
                cfg.estimator_init = EstimatorInit::Zero;
            } else if (mode == "estimated_gain") {
                cfg.estimator_init = EstimatorInit::EstimatedGain;
            } else {
                fail("loop.estimator_init", "must be \"zero\" or \"estimated_gain\"");
            }
        }
        if (lp.contains("v_diag")) cfg.v_diag = as_vector(lp["v_diag"], "loop.v_diag");
        if (lp.contains("q_diag")) cfg.q_diag = as_vector(lp["q_diag"], "loop.q_diag");
        if (lp.contains("du_frac")) cfg.du_frac = as_double(lp["du_frac"], "loop.du_frac");
        if (lp.contains("noise_band"))
            cfg.plant.noise_band = as_double(lp["noise_band"], "loop.noise_band");
        if (lp.contains("seed")) cfg.seed = as_u64(lp["seed"], "loop.seed");
    }

    if (doc.contains("faults")) {
        const json& fj = doc["faults"];
        if (!fj.is_object()) fail("faults", "must be an object");
        check_keys(fj, "faults", {"mode", "p_f", "script"});
        const std::string mode = as_string(require(fj, "faults", "mode"), "faults.mode");
        if (mode == "none") {
            sc.loop.faults.mode = FaultSpec::Mode::None;
        } else if (mode == "random") {
            sc.loop.faults.mode = FaultSpec::Mode::Random;
            sc.loop.faults.p_f = as_double(require(fj, "faults", "p_f"), "faults.p_f");
        } else if (mode == "scripted") {
            sc.loop.faults.mode = FaultSpec::Mode::Scripted;
            const json& script = require(fj, "faults", "script");
            if (!script.is_array()) fail("faults.script", "must be an array");
            for (size_t i = 0; i < script.size(); ++i) {
                const std::string path = "faults.script[" + std::to_string(i) + "]";
                const json& e = script[i];
                if (!e.is_object()) fail(path, "must be an object");
                check_keys(e, path, {"step", "task", "proc", "progress"});
                ScriptedFault f;
                f.step = as_long(require(e, path, "step"), path + ".step");
                f.task = resolve_task_ref(require(e, path, "task"), path + ".task", sc.loop.topo);
                f.proc = as_int(require(e, path, "proc"), path + ".proc");
                if (e.contains("progress")) f.progress = as_double(e["progress"], path + ".progress");
                sc.loop.faults.script.push_back(f);
            }
        } else {
            fail("faults.mode", "must be \"none\", \"random\" or \"scripted\"");
        }
    }

    if (doc.contains("load_schedule")) {
        const json& ls = doc["load_schedule"];
        if (!ls.is_array()) fail("load_schedule", "must be an array");
        for (size_t i = 0; i < ls.size(); ++i) {
            const std::string path = "load_schedule[" + std::to_string(i) + "]";
            const json& e = ls[i];
            if (!e.is_object()) fail(path, "must be an object");
            check_keys(e, path, {"step", "factor"});
            LoadChange c;
            c.step = as_long(require(e, path, "step"), path + ".step");
            c.factor = as_double(require(e, path, "factor"), path + ".factor");
            sc.load_schedule.push_back(c);
        }
    }

    // Surface structural problems now rather than at run time.
    SystemTopology check = sc.loop.topo;
    check.apply_default_rate_bounds();
    try {
        check.validate();
        validate_load_schedule(sc.load_schedule);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_scenario_json(ss.str());
}

namespace {

const char* kExp1 = R"JSON({
  "schema_version": 1,
  "name": "exp1",
  "topology": {
    "n_procs": 2,
    "sample_period": 1.0,
    "tasks": [
      {"id": "t00", "wcet_est": 0.05, "exec_factor": 0.3, "rate_init": 4.0615, "rate_min": 0.40615, "criticality": "non_critical", "home_proc": 0},
      {"id": "t01", "wcet_est": 0.1, "exec_factor": 0.3, "rate_init": 2.03075, "rate_min": 0.203075, "criticality": "non_critical", "home_proc": 0},
      {"id": "t02", "wcet_est": 0.15, "exec_factor": 0.3, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 0},
      {"id": "t03", "wcet_est": 0.25, "exec_factor": 0.3, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 0},
      {"id": "t10", "wcet_est": 0.05, "exec_factor": 0.3, "rate_init": 4.0615, "rate_min": 0.40615, "criticality": "non_critical", "home_proc": 1},
      {"id": "t11", "wcet_est": 0.1, "exec_factor": 0.3, "rate_init": 2.03075, "rate_min": 0.203075, "criticality": "non_critical", "home_proc": 1},
      {"id": "t12", "wcet_est": 0.15, "exec_factor": 0.3, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 1},
      {"id": "t13", "wcet_est": 0.25, "exec_factor": 0.3, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 1}
    ]
  },
  "loop": {
    "n_steps": 1000,
    "warmup_steps": 10,
    "dither_amplitude": 0.05,
    "set_point": 0.8123,
    "rls": {"order": 1, "lambda": 0.99, "p0": 100.0, "p_max": 1000.0},
    "estimator_init": "zero",
    "q_diag": [0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3],
    "du_frac": 0.05,
    "noise_band": 0.002,
    "seed": 7
  },
  "faults": {"mode": "none"}
}
)JSON";

const char* kExp2 = R"JSON({
  "schema_version": 1,
  "name": "exp2",
  "topology": {
    "n_procs": 2,
    "sample_period": 1.0,
    "tasks": [
      {"id": "t00", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 0},
      {"id": "t01", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 0},
      {"id": "t02", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 0},
      {"id": "t03", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 0},
      {"id": "t10", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 1},
      {"id": "t11", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 1},
      {"id": "t12", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 1},
      {"id": "t13", "wcet_est": 0.15, "exec_factor": 7.0, "rate_init": 1.3538333333333334, "rate_min": 0.13538333333333336, "criticality": "non_critical", "home_proc": 1}
    ]
  },
  "loop": {
    "n_steps": 1000,
    "warmup_steps": 10,
    "dither_amplitude": 0.0,
    "set_point": 0.8123,
    "rls": {"order": 1, "lambda": 0.96, "p0": 100.0, "p_max": 250.0},
    "estimator_init": "estimated_gain",
    "q_diag": [0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3],
    "du_frac": 0.1,
    "noise_band": 0.0,
    "seed": 19
  },
  "faults": {"mode": "none"}
}
)JSON";

const char* kExp3 = R"JSON({
  "schema_version": 1,
  "name": "exp3",
  "topology": {
    "n_procs": 2,
    "sample_period": 1.0,
    "tasks": [
      {"id": "t00", "wcet_est": 0.05, "exec_factor": 1.0, "rate_init": 4.0615, "rate_min": 0.40615, "criticality": "non_critical", "home_proc": 0},
      {"id": "t01", "wcet_est": 0.1, "exec_factor": 1.0, "rate_init": 2.03075, "rate_min": 0.203075, "criticality": "non_critical", "home_proc": 0},
      {"id": "t02", "wcet_est": 0.15, "exec_factor": 1.0, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 0},
      {"id": "t03", "wcet_est": 0.25, "exec_factor": 1.0, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 0},
      {"id": "t10", "wcet_est": 0.05, "exec_factor": 1.0, "rate_init": 4.0615, "rate_min": 0.40615, "criticality": "non_critical", "home_proc": 1},
      {"id": "t11", "wcet_est": 0.1, "exec_factor": 1.0, "rate_init": 2.03075, "rate_min": 0.203075, "criticality": "non_critical", "home_proc": 1},
      {"id": "t12", "wcet_est": 0.15, "exec_factor": 1.0, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 1},
      {"id": "t13", "wcet_est": 0.25, "exec_factor": 1.0, "rate_init": 1.015375, "rate_min": 0.1015375, "criticality": "non_critical", "home_proc": 1}
    ]
  },
  "loop": {
    "n_steps": 1000,
    "warmup_steps": 10,
    "dither_amplitude": 0.0,
    "set_point": 0.8123,
    "rls": {"order": 1, "lambda": 0.98, "p0": 100.0, "p_max": 1000.0},
    "estimator_init": "estimated_gain",
    "q_diag": [0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3],
    "du_frac": 0.05,
    "noise_band": 0.0,
    "seed": 23
  },
  "faults": {"mode": "none"},
  "load_schedule": [
    {"step": 300, "factor": 1.2},
    {"step": 400, "factor": 0.8},
    {"step": 800, "factor": 1.15}
  ]
}
)JSON";

const std::map<std::string, const char*>& builtin_map() {
    static const std::map<std::string, const char*> m = {
        {"exp1", kExp1}, {"exp2", kExp2}, {"exp3", kExp3}};
    return m;
}

}  // namespace

const std::vector<std::string>& builtin_scenario_names() {
    static const std::vector<std::string> names = {"exp1", "exp2", "exp3"};
    return names;
}

bool is_builtin_scenario(const std::string& name) { return builtin_map().count(name) > 0; }

std::string builtin_scenario_text(const std::string& name) {
    auto it = builtin_map().find(name);
    if (it == builtin_map().end())
        throw std::invalid_argument("unknown builtin scenario: " + name);
    return it->second;
}

Scenario builtin_scenario(const std::string& name) {
    return load_scenario_json(builtin_scenario_text(name));
}

}  // namespace fcsim
