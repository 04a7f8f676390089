#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "fcsim/scenario.hpp"
#include "fcsim/trace_io.hpp"

namespace {

fcsim::Scenario resolve_scenario(const std::string& ref) {
    if (fcsim::is_builtin_scenario(ref)) return fcsim::builtin_scenario(ref);
    return fcsim::load_scenario_file(ref);
}

std::string out_dir_or_default(const std::string& flag) {
    std::string dir = ".";
    if (!flag.empty()) {
        dir = flag;
    } else if (const char* env = std::getenv("FCSIM_OUT_DIR"); env && *env) {
        dir = env;
    }
    std::filesystem::create_directories(dir);
    return dir;
}

void apply_sweep_param(fcsim::Scenario& sc, const std::string& param, double value) {
    if (param == "g") {
        for (auto& t : sc.loop.topo.tasks) t.exec_factor = value;
    } else if (param == "lambda") {
        sc.loop.rls.lambda = value;
    } else if (param == "q_weight") {
        sc.loop.q_diag =
            Eigen::VectorXd::Constant(static_cast<Eigen::Index>(sc.loop.topo.tasks.size()), value);
    } else if (param == "v_weight") {
        sc.loop.v_diag = Eigen::VectorXd::Constant(sc.loop.topo.n_procs, value);
    } else if (param == "set_point") {
        sc.loop.set_point = value;
    } else if (param == "p_f") {
        sc.loop.faults.mode = fcsim::FaultSpec::Mode::Random;
        sc.loop.faults.p_f = value;
    } else {
        throw CLI::ValidationError("param", "unknown sweep parameter '" + param +
                                                "' (expected g, lambda, q_weight, v_weight, "
                                                "set_point or p_f)");
    }
}

void print_metrics(const fcsim::Metrics& m) {
    std::printf("settling_step %ld\n", m.settling_step);
    std::printf("overshoot %.6f\n", m.overshoot);
    std::printf("steady_state_err %.6f\n", m.steady_state_err);
    std::printf("miss_ratio %.6f (%ld/%ld)\n", m.overall_miss_ratio, m.total_missed,
                m.total_released);
    std::printf("mean_cost %.6g\n", m.mean_cost);
    std::printf("faults injected/masked/reexecuted/unrecovered %ld/%ld/%ld/%ld\n",
                m.faults_injected, m.faults_masked, m.faults_reexecuted, m.faults_unrecovered);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop rate-adaptation simulator for multiprocessor task sets"};
    app.require_subcommand(1);

    std::string scenario_ref;
    std::string out_flag;
    std::uint64_t seed_override = 0;
    bool have_seed = false;

    CLI::App* run = app.add_subcommand("run", "Run a scenario and write its trace");
    run->add_option("scenario", scenario_ref, "Builtin name (exp1, exp2, exp3) or JSON file path")
        ->required();
    run->add_option("--out", out_flag, "Output directory (default: $FCSIM_OUT_DIR or .)");
    run->add_option("--seed", seed_override, "Override the scenario seed")
        ->each([&](const std::string&) { have_seed = true; });

    std::string sweep_param;
    std::string sweep_values;
    CLI::App* sweep = app.add_subcommand("sweep", "Run a scenario across parameter values");
    sweep->add_option("param", sweep_param,
                      "Parameter: g, lambda, q_weight, v_weight, set_point, p_f")
        ->required();
    sweep->add_option("values", sweep_values, "Comma-separated list of values (may be empty)")
        ->required();
    sweep->add_option("scenario", scenario_ref, "Builtin name or JSON file path")->required();
    sweep->add_option("--out", out_flag, "Also write per-value traces to this directory");

    CLI::App* validate = app.add_subcommand("validate", "Parse and validate a scenario");
    validate->add_option("scenario", scenario_ref, "Builtin name or JSON file path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            fcsim::Scenario sc = resolve_scenario(scenario_ref);
            if (have_seed) sc.loop.seed = seed_override;
            const fcsim::LoopResult result = fcsim::run_loop(sc.loop, sc.load_schedule);
            std::printf("scenario %s: %ld steps, %d procs, %d tasks, seed %llu\n", sc.name.c_str(),
                        sc.loop.n_steps, sc.loop.topo.n_procs, sc.loop.topo.num_tasks(),
                        static_cast<unsigned long long>(sc.loop.seed));
            if (result.trace.empty()) {
                std::printf("empty trace, nothing to summarize\n");
                return 0;
            }
            print_metrics(fcsim::summarize(result, sc.loop.set_point));
            const std::string path = out_dir_or_default(out_flag) + "/" + sc.name + "_trace.csv";
            fcsim::write_trace_csv(path, result.trace);
            std::printf("trace written to %s\n", path.c_str());
        } else if (sweep->parsed()) {
            std::vector<double> values;
            std::string cur;
            for (char c : sweep_values + ",") {
                if (c == ',') {
                    if (!cur.empty()) {
                        size_t used = 0;
                        values.push_back(std::stod(cur, &used));
                        if (used != cur.size())
                            throw CLI::ValidationError("values", "malformed value '" + cur + "'");
                        cur.clear();
                    }
                } else {
                    cur += c;
                }
            }
            const fcsim::Scenario base = resolve_scenario(scenario_ref);
            {
                // Reject unknown parameters before spawning anything.
                fcsim::Scenario probe = base;
                if (!values.empty()) apply_sweep_param(probe, sweep_param, values.front());
                else apply_sweep_param(probe, sweep_param, 0.5);
            }

            std::vector<std::future<std::pair<fcsim::LoopResult, fcsim::Metrics>>> jobs;
            for (double v : values) {
                jobs.push_back(std::async(std::launch::async, [&base, &sweep_param, v] {
                    fcsim::Scenario sc = base;
                    apply_sweep_param(sc, sweep_param, v);
                    fcsim::LoopResult r = fcsim::run_loop(sc.loop, sc.load_schedule);
                    fcsim::Metrics m = fcsim::summarize(r, sc.loop.set_point);
                    return std::make_pair(std::move(r), m);
                }));
            }
            std::printf("%s,settling_step,overshoot,steady_state_err,miss_ratio,mean_cost,flag\n",
                        sweep_param.c_str());
            for (size_t i = 0; i < jobs.size(); ++i) {
                auto [result, m] = jobs[i].get();
                std::printf("%.17g,%ld,%.6f,%.6f,%.6f,%.6g,%s\n", values[i], m.settling_step,
                            m.overshoot, m.steady_state_err, m.overall_miss_ratio, m.mean_cost,
                            m.settling_step < 0 ? "non-settling" : "settled");
                if (!out_flag.empty()) {
                    char suffix[64];
                    std::snprintf(suffix, sizeof(suffix), "%g", values[i]);
                    const std::string path = out_dir_or_default(out_flag) + "/" + base.name + "_" +
                                             sweep_param + "_" + suffix + "_trace.csv";
                    fcsim::write_trace_csv(path, result.trace);
                }
            }
        } else if (validate->parsed()) {
            const fcsim::Scenario sc = resolve_scenario(scenario_ref);
            std::printf("ok: %s (%d procs, %d tasks, %ld steps)\n", sc.name.c_str(),
                        sc.loop.topo.n_procs, sc.loop.topo.num_tasks(), sc.loop.n_steps);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
