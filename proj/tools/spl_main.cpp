// spl — equation discovery by Monte Carlo tree search over grammar
// derivations. Subcommands: discover, benchmark, experiment, rerun.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "spl/errors.hpp"
#include "spl/experiments.hpp"
#include "spl/kvdoc.hpp"
#include "spl/mcts.hpp"
#include "spl/numdata.hpp"
#include "spl/tasks.hpp"

namespace fs = std::filesystem;
using namespace spl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

#ifndef SPL_BUILD_ID
#define SPL_BUILD_ID "unknown"
#endif

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string data_root() {
    const char* env = std::getenv("SPL_DATA_DIR");
    return env ? env : "data";
}

int default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

/// Accumulates the resolved configuration and finishes with the manifest
/// write; rerun replays a command from these entries.
struct Manifest {
    KvDoc doc;
    std::string out_dir;

    Manifest(const std::string& command, const std::string& out) : out_dir(out) {
        doc.add("command", command);
        doc.add("build", SPL_BUILD_ID);
        doc.add("created", iso_timestamp());
        doc.add("out", out);
    }

    void arg(const std::string& key, const std::string& value) { doc.add("arg." + key, value); }
    void arg_int(const std::string& key, std::int64_t v) { arg(key, std::to_string(v)); }
    void arg_double(const std::string& key, double v) { arg(key, format_double(v)); }

    void output(const std::string& name) { doc.add("output", name); }

    void save() const {
        fs::create_directories(out_dir);
        doc.save((fs::path(out_dir) / "manifest.txt").string());
    }
};

// ---------------------------------------------------------------------------
// discover
// ---------------------------------------------------------------------------

struct DiscoverArgs {
    std::string data;
    std::string grammar;
    std::string target_col;
    std::string time_col;
    std::string out = "spl_run";
    double eta = 0.99;
    double c = 0.70710678118654752440;
    double epsilon = 0.05;
    int tmax = 50;
    int episodes = 10000;
    int sims = 10;
    int max_constants = 3;
    int transplant_interval = 1000;
    std::uint64_t seed = 0;
    int checkpoint_every = 0;
};

int run_discover(const DiscoverArgs& a) {
    if (a.episodes < 1) {
        std::cerr << "spl discover: --episodes must be >= 1\n";
        return kExitConfig;
    }
    Grammar grammar = load_grammar_file(a.grammar);

    CsvSchema schema;
    schema.time_column = a.time_col;
    if (!a.target_col.empty()) {
        schema.target_column = a.target_col;
    } else {
        // default: a column literally named "target", else the last column
        std::ifstream probe(a.data);
        if (!probe) throw DataError("cannot open data file: " + a.data);
        std::string header;
        std::getline(probe, header);
        auto cols = split_ws([&] {
            std::string s = header;
            for (auto& ch : s)
                if (ch == ',') ch = ' ';
            return s;
        }());
        if (cols.empty()) throw DataError(a.data + ": empty header");
        schema.target_column = "target";
        bool has_target = false;
        for (const auto& c : cols) has_target = has_target || c == "target";
        if (!has_target) schema.target_column = cols.back();
    }
    CsvLoadInfo info;
    Dataset data = load_csv(a.data, schema, &info);
    if (info.rows_dropped > 0)
        std::cerr << "spl discover: dropped " << info.rows_dropped << " non-finite rows\n";

    SearchConfig cfg;
    cfg.eta = a.eta;
    cfg.c = a.c;
    cfg.epsilon = a.epsilon;
    cfg.t_max = a.tmax;
    cfg.episodes = a.episodes;
    cfg.sims_per_expansion = a.sims;
    cfg.max_constants = a.max_constants;
    cfg.transplant.interval_episodes = a.transplant_interval;
    cfg.seed = a.seed;
    cfg.checkpoint_every = a.checkpoint_every;
    if (a.checkpoint_every > 0) {
        fs::create_directories(a.out);
        cfg.checkpoint_path = (fs::path(a.out) / "checkpoint.txt").string();
    }

    DiscoveryResult result = run_discovery(grammar, data, cfg);

    Manifest manifest("discover", a.out);
    manifest.arg("data", a.data);
    manifest.arg("grammar", a.grammar);
    manifest.arg("target_col", schema.target_column);
    manifest.arg("time_col", a.time_col);
    manifest.arg_double("eta", a.eta);
    manifest.arg_double("c", a.c);
    manifest.arg_double("epsilon", a.epsilon);
    manifest.arg_int("tmax", a.tmax);
    manifest.arg_int("episodes", a.episodes);
    manifest.arg_int("sims", a.sims);
    manifest.arg_int("max_constants", a.max_constants);
    manifest.arg_int("transplant_interval", a.transplant_interval);
    manifest.arg_int("seed", static_cast<std::int64_t>(a.seed));
    manifest.arg_int("checkpoint_every", a.checkpoint_every);

    fs::create_directories(a.out);
    {
        KvDoc eq;
        eq.add("expression", result.expression);
        eq.add("expression_slots", result.expression_raw);
        eq.add_double("best_reward", result.best_reward);
        eq.add_double("train_rmse", result.best_rmse);
        eq.add_int("n_rules", result.best_n_rules);
        eq.add_int("episode_found", result.episode_found);
        eq.add_int("episodes_run", static_cast<std::int64_t>(result.stats.episodes_run));
        for (double c_val : result.constants) eq.add_double("constant", c_val);
        eq.save((fs::path(a.out) / "equation.txt").string());
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t e = 0; e < result.reward_trace.size(); ++e)
            rows.push_back({std::to_string(e + 1), format_double(result.reward_trace[e])});
        write_csv((fs::path(a.out) / "trace.csv").string(), {"episode", "best_reward"}, rows);
    }
    manifest.output("equation.txt");
    manifest.output("trace.csv");
    manifest.save();

    std::cout << result.expression << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkArgs {
    std::string suite;
    std::string scale = "desk";
    std::string only;
    int trials = 0;  // 0 = suite default
    std::uint64_t seed = 0;
    int jobs = default_jobs();
    std::string out = "spl_benchmark";
};

std::vector<std::string> resolve_task_ids(const std::string& only) {
    std::vector<std::string> ids;
    if (only.empty()) {
        for (const auto& t : benchmark_tasks())
            if (t.id != "toy") ids.push_back(t.id);
        return ids;
    }
    std::string token;
    std::istringstream in(only);
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        std::string id = token.find("nguyen") == 0 || token == "toy" ? token : "nguyen-" + token;
        if (!find_task(id)) throw ConfigError("unknown task id: " + token);
        ids.push_back(id);
    }
    if (ids.empty()) throw ConfigError("--only selected no tasks");
    return ids;
}

int run_benchmark(const BenchmarkArgs& a) {
    const bool desk = a.scale == "desk";
    if (!desk && a.scale != "paper") throw ConfigError("unknown scale: " + a.scale);

    Manifest manifest("benchmark", a.out);
    manifest.arg("suite", a.suite);
    manifest.arg("scale", a.scale);
    manifest.arg("only", a.only);
    manifest.arg_int("trials", a.trials);
    manifest.arg_int("seed", static_cast<std::int64_t>(a.seed));
    fs::create_directories(a.out);

    if (a.suite == "nguyen") {
        auto ids = resolve_task_ids(a.only);
        std::vector<std::vector<std::string>> summary;
        for (const auto& id : ids) {
            RecoverySpec spec;
            spec.task_id = id;
            spec.trials = a.trials > 0 ? a.trials : (desk ? 20 : 100);
            spec.desk_scale = desk;
            spec.seed = split_seed(a.seed, hash_sequence({static_cast<int>(ids.size())},
                                                         std::hash<std::string>{}(id)));
            spec.jobs = a.jobs;
            RecoveryReport report = run_recovery(spec);
            const std::string file = "recovery_" + id + ".csv";
            write_recovery_csv(report, (fs::path(a.out) / file).string());
            manifest.output(file);
            summary.push_back({id, std::to_string(report.trials.size()),
                               std::to_string(report.successes()),
                               format_double(report.recovery_rate)});
            std::cout << id << ": " << report.successes() << "/" << report.trials.size()
                      << " recovered\n";
        }
        write_csv((fs::path(a.out) / "summary.csv").string(),
                  {"task", "trials", "successes", "recovery_rate"}, summary);
        manifest.output("summary.csv");
    } else if (a.suite == "grid") {
        GridSpec spec;
        spec.trials = a.trials > 0 ? a.trials : 20;
        spec.desk_scale = desk;
        spec.seed = a.seed;
        spec.jobs = a.jobs;
        auto cells = run_grid(spec);
        write_grid_csv(cells, (fs::path(a.out) / "grid.csv").string());
        manifest.output("grid.csv");
        for (const auto& c : cells)
            std::cout << "noise=" << c.noise << " points=" << c.points
                      << " rate=" << c.recovery_rate << "\n";
    } else if (a.suite == "ablation") {
        const std::vector<std::pair<std::string, int>> variants = {
            {"full", 0}, {"no_scaling", 1}, {"no_parsimony", 2}, {"no_transplant", 3}};
        auto ids = a.only.empty() ? desk_subset() : resolve_task_ids(a.only);
        std::vector<std::vector<std::string>> summary;
        for (const auto& [name, kind] : variants) {
            double rate_sum = 0.0;
            double n_rules_sum = 0.0;
            int n_rules_count = 0;
            for (const auto& id : ids) {
                RecoverySpec spec;
                spec.task_id = id;
                spec.trials = a.trials > 0 ? a.trials : 10;
                spec.desk_scale = desk;
                spec.seed = split_seed(a.seed, std::hash<std::string>{}(id));
                spec.jobs = a.jobs;
                spec.disable_adaptive_scaling = kind == 1;
                spec.disable_parsimony = kind == 2;
                spec.disable_transplant = kind == 3;
                RecoveryReport report = run_recovery(spec);
                rate_sum += report.recovery_rate;
                for (const auto& t : report.trials) {
                    n_rules_sum += t.n_rules;
                    ++n_rules_count;
                }
                const std::string file = "ablation_" + name + "_" + id + ".csv";
                write_recovery_csv(report, (fs::path(a.out) / file).string());
                manifest.output(file);
            }
            summary.push_back({name, format_double(rate_sum / static_cast<double>(ids.size())),
                               format_double(n_rules_sum / std::max(n_rules_count, 1))});
            std::cout << name << ": avg recovery "
                      << rate_sum / static_cast<double>(ids.size()) << "\n";
        }
        write_csv((fs::path(a.out) / "ablation_summary.csv").string(),
                  {"variant", "avg_recovery_rate", "avg_n_rules"}, summary);
        manifest.output("ablation_summary.csv");
    } else {
        throw ConfigError("unknown suite: " + a.suite);
    }
    manifest.save();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentArgs {
    std::string name;
    std::string config;
    std::string data;
    std::uint64_t seed = 0;
    int jobs = default_jobs();
    bool synthetic = false;
    std::string out = "spl_experiment";
};

int run_experiment_lorenz(const ExperimentArgs& a, const KvDoc& cfg, Manifest& manifest) {
    LorenzSpec spec;
    spec.trials = static_cast<int>(cfg.get_int_or("trials", 1));
    spec.episodes = static_cast<int>(cfg.get_int_or("episodes", spec.episodes));
    spec.seed = a.seed;
    spec.jobs = a.jobs;
    spec.eta = cfg.get_double_or("eta", spec.eta);
    spec.sims_per_expansion =
        static_cast<int>(cfg.get_int_or("sims", spec.sims_per_expansion));
    spec.transplant_interval =
        static_cast<int>(cfg.get_int_or("transplant_interval", spec.transplant_interval));
    spec.data.noise_level = cfg.get_double_or("noise", spec.data.noise_level);
    spec.data.dt = cfg.get_double_or("dt", spec.data.dt);
    spec.data.t_end = cfg.get_double_or("t_end", spec.data.t_end);
    spec.data.sg_window = static_cast<int>(cfg.get_int_or("sg_window", spec.data.sg_window));
    spec.data.sg_polyorder =
        static_cast<int>(cfg.get_int_or("sg_polyorder", spec.data.sg_polyorder));
    spec.data.smooth_states_first =
        cfg.get_bool_or("smooth_states_first", spec.data.smooth_states_first);
    spec.data.smooth_observations =
        cfg.get_bool_or("smooth_observations", spec.data.smooth_observations);

    manifest.arg_int("trials", spec.trials);
    manifest.arg_int("episodes", spec.episodes);
    manifest.arg_double("eta", spec.eta);
    manifest.arg_int("sims", spec.sims_per_expansion);
    manifest.arg_int("transplant_interval", spec.transplant_interval);
    manifest.arg_double("noise", spec.data.noise_level);
    manifest.arg_double("dt", spec.data.dt);
    manifest.arg_double("t_end", spec.data.t_end);
    manifest.arg_int("sg_window", spec.data.sg_window);
    manifest.arg_int("sg_polyorder", spec.data.sg_polyorder);
    manifest.arg("smooth_states_first", spec.data.smooth_states_first ? "true" : "false");
    manifest.arg("smooth_observations", spec.data.smooth_observations ? "true" : "false");

    LorenzReport report = run_lorenz(spec);
    write_lorenz_csv(report, (fs::path(a.out) / "lorenz_support.csv").string());
    manifest.output("lorenz_support.csv");
    manifest.save();

    for (const auto& trial : report.trials)
        for (const auto& d : trial.dims)
            std::cout << d.name << ": " << d.expression
                      << (d.support_exact ? "  [support exact]" : "  [support mismatch]")
                      << "\n";
    std::cout << "trials with exact support on all dimensions: " << report.trials_support_exact
              << "/" << report.trials.size() << "\n";
    return kExitOk;
}

int run_experiment_balldrop(const ExperimentArgs& a, const KvDoc& cfg, Manifest& manifest) {
    BalldropSpec spec;
    spec.data_dir = !a.data.empty() ? a.data : (fs::path(data_root()) / "balldrop").string();
    spec.synthetic_fallback = a.synthetic || cfg.get_bool_or("synthetic", false);
    spec.episodes = static_cast<int>(cfg.get_int_or("episodes", spec.episodes));
    spec.eta = cfg.get_double_or("eta", spec.eta);
    spec.t_max = static_cast<int>(cfg.get_int_or("tmax", spec.t_max));
    spec.seed = a.seed;

    manifest.arg("data_dir", spec.data_dir);
    manifest.arg("synthetic", spec.synthetic_fallback ? "true" : "false");
    manifest.arg_int("episodes", spec.episodes);
    manifest.arg_double("eta", spec.eta);
    manifest.arg_int("tmax", spec.t_max);

    BalldropReport report = run_balldrop(spec);
    if (report.rows.empty()) {
        std::cerr << "spl experiment balldrop: no ball records found under '" << spec.data_dir
                  << "'.\n"
                  << "Fetch the public dataset with scripts/fetch_balldrop.sh, point\n"
                  << "SPL_DATA_DIR (or --data) at it, or pass --synthetic to run on\n"
                  << "generated drag-fall records.\n";
        return kExitData;
    }
    write_balldrop_csv(report, (fs::path(a.out) / "balldrop_mse.csv").string());
    manifest.output("balldrop_mse.csv");
    manifest.save();
    for (const auto& row : report.rows)
        std::cout << row.ball << ": spl=" << row.mse_spl << " m1=" << row.mse_model1
                  << " m2=" << row.mse_model2 << " m3=" << row.mse_model3 << "\n";
    return kExitOk;
}

int run_experiment_pendulum(const ExperimentArgs& a, const KvDoc& cfg, Manifest& manifest) {
    std::string data_file = a.data;
    if (data_file.empty()) data_file = (fs::path(data_root()) / "pendulum.csv").string();
    if (!fs::exists(data_file)) {
        std::cerr << "spl experiment pendulum: no state file at '" << data_file << "'.\n"
                  << "Provide a CSV of pre-extracted states with columns\n"
                  << "  th1,th2,w1,w2,dw1,dw2\n"
                  << "via --data or place it at $SPL_DATA_DIR/pendulum.csv.\n";
        return kExitData;
    }

    const std::string grammar_dir = cfg.get_or("grammar_dir", "configs");
    const int episodes = static_cast<int>(cfg.get_int_or("episodes", 8000));
    const double eta = cfg.get_double_or("eta", 1.0);
    const int tmax = static_cast<int>(cfg.get_int_or("tmax", 20));

    manifest.arg("data", data_file);
    manifest.arg("grammar_dir", grammar_dir);
    manifest.arg_int("episodes", episodes);
    manifest.arg_double("eta", eta);
    manifest.arg_int("tmax", tmax);

    KvDoc eq;
    for (const auto& [target, grammar_file] :
         {std::pair{std::string("dw1"), std::string("pendulum_w1.g")},
          std::pair{std::string("dw2"), std::string("pendulum_w2.g")}}) {
        Grammar grammar = load_grammar_file((fs::path(grammar_dir) / grammar_file).string());
        CsvSchema schema;
        schema.target_column = target;
        Dataset data = load_csv(data_file, schema);
        SearchConfig scfg;
        scfg.eta = eta;
        scfg.t_max = tmax;
        scfg.episodes = episodes;
        scfg.sims_per_expansion = 25;
        scfg.transplant.interval_episodes = 1000;
        scfg.seed = split_seed(a.seed, target == "dw1" ? 1 : 2);
        DiscoveryResult result = run_discovery(grammar, data, scfg);
        eq.add(target, result.expression);
        eq.add_double(target + "_train_rmse", result.best_rmse);
        std::cout << target << " = " << result.expression << "\n";
    }
    fs::create_directories(a.out);
    eq.save((fs::path(a.out) / "pendulum_equations.txt").string());
    manifest.output("pendulum_equations.txt");
    manifest.save();
    return kExitOk;
}

int run_experiment(const ExperimentArgs& a) {
    KvDoc cfg;
    if (!a.config.empty()) cfg = KvDoc::load(a.config);

    Manifest manifest("experiment", a.out);
    manifest.arg("name", a.name);
    manifest.arg("config", a.config);
    manifest.arg("data", a.data);
    manifest.arg("synthetic", a.synthetic ? "true" : "false");
    manifest.arg_int("seed", static_cast<std::int64_t>(a.seed));
    fs::create_directories(a.out);

    if (a.name == "lorenz") return run_experiment_lorenz(a, cfg, manifest);
    if (a.name == "balldrop") return run_experiment_balldrop(a, cfg, manifest);
    if (a.name == "pendulum") return run_experiment_pendulum(a, cfg, manifest);
    throw ConfigError("unknown experiment: " + a.name);
}

// ---------------------------------------------------------------------------
// rerun
// ---------------------------------------------------------------------------

int run_rerun(const std::string& manifest_path, std::string out_override) {
    KvDoc m = KvDoc::load(manifest_path);
    const std::string command = m.get("command");
    std::string out = out_override.empty() ? m.get("out") + "_rerun" : std::move(out_override);

    auto arg = [&](const std::string& k) { return m.get_or("arg." + k, ""); };
    auto arg_i = [&](const std::string& k, std::int64_t d) {
        return m.has("arg." + k) ? m.get_int("arg." + k) : d;
    };
    auto arg_d = [&](const std::string& k, double d) {
        return m.has("arg." + k) ? m.get_double("arg." + k) : d;
    };

    if (command == "discover") {
        DiscoverArgs a;
        a.data = arg("data");
        a.grammar = arg("grammar");
        a.target_col = arg("target_col");
        a.time_col = arg("time_col");
        a.eta = arg_d("eta", a.eta);
        a.c = arg_d("c", a.c);
        a.epsilon = arg_d("epsilon", a.epsilon);
        a.tmax = static_cast<int>(arg_i("tmax", a.tmax));
        a.episodes = static_cast<int>(arg_i("episodes", a.episodes));
        a.sims = static_cast<int>(arg_i("sims", a.sims));
        a.max_constants = static_cast<int>(arg_i("max_constants", a.max_constants));
        a.transplant_interval =
            static_cast<int>(arg_i("transplant_interval", a.transplant_interval));
        a.seed = static_cast<std::uint64_t>(arg_i("seed", 0));
        a.checkpoint_every = static_cast<int>(arg_i("checkpoint_every", 0));
        a.out = out;
        return run_discover(a);
    }
    if (command == "benchmark") {
        BenchmarkArgs a;
        a.suite = arg("suite");
        a.scale = arg("scale");
        a.only = arg("only");
        a.trials = static_cast<int>(arg_i("trials", 0));
        a.seed = static_cast<std::uint64_t>(arg_i("seed", 0));
        a.out = out;
        return run_benchmark(a);
    }
    if (command == "experiment") {
        ExperimentArgs a;
        a.name = arg("name");
        a.config = arg("config");
        a.data = arg("data");
        a.synthetic = arg("synthetic") == "true";
        a.seed = static_cast<std::uint64_t>(arg_i("seed", 0));
        a.out = out;
        return run_experiment(a);
    }
    throw ConfigError("manifest has unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic regression and dynamics discovery via grammar-guided MCTS"};
    app.require_subcommand(1);

    DiscoverArgs d;
    auto* discover = app.add_subcommand("discover", "run one discovery on a CSV dataset");
    discover->add_option("--data", d.data, "input CSV (header row)")->required();
    discover->add_option("--grammar", d.grammar, "grammar config file")->required();
    discover->add_option("--target-col", d.target_col, "target column (default: 'target' or last)");
    discover->add_option("--time-col", d.time_col, "time column to exclude from variables");
    discover->add_option("--eta", d.eta, "parsimony discount");
    discover->add_option("--c", d.c, "UCT exploration constant");
    discover->add_option("--epsilon", d.epsilon, "epsilon-greedy rate");
    discover->add_option("--tmax", d.tmax, "maximum traversal length");
    discover->add_option("--episodes", d.episodes, "training episodes");
    discover->add_option("--sims", d.sims, "simulations per expansion");
    discover->add_option("--max-constants", d.max_constants, "constant slots cap");
    discover->add_option("--transplant-interval", d.transplant_interval,
                         "episodes between module transplantation (0 = off)");
    discover->add_option("--seed", d.seed, "RNG seed");
    discover->add_option("--checkpoint-every", d.checkpoint_every,
                         "tree snapshot cadence (0 = off)");
    discover->add_option("--out", d.out, "output directory");

    BenchmarkArgs b;
    auto* benchmark = app.add_subcommand("benchmark", "run a recovery-rate suite");
    benchmark->add_option("--suite", b.suite, "nguyen | grid | ablation")->required();
    benchmark->add_option("--scale", b.scale, "desk | paper");
    benchmark->add_option("--only", b.only, "comma-separated task ids, e.g. 1,2,6,8c");
    benchmark->add_option("--trials", b.trials, "trials per task (0 = suite default)");
    benchmark->add_option("--seed", b.seed, "master seed");
    benchmark->add_option("--jobs", b.jobs, "parallel trial workers");
    benchmark->add_option("--out", b.out, "output directory");

    ExperimentArgs e;
    auto* experiment = app.add_subcommand("experiment", "reproduce a dynamics experiment");
    experiment->add_option("--name", e.name, "lorenz | balldrop | pendulum")->required();
    experiment->add_option("--config", e.config, "experiment config file");
    experiment->add_option("--data", e.data, "dataset file/directory override");
    experiment->add_option("--seed", e.seed, "master seed");
    experiment->add_option("--jobs", e.jobs, "parallel trial workers");
    experiment->add_flag("--synthetic", e.synthetic,
                         "balldrop: use the synthetic drag generator when no data");
    experiment->add_option("--out", e.out, "output directory");

    std::string rerun_manifest, rerun_out;
    auto* rerun = app.add_subcommand("rerun", "replay a command from its manifest");
    rerun->add_option("manifest", rerun_manifest, "path to manifest.txt")->required();
    rerun->add_option("--out", rerun_out, "output directory (default: <orig>_rerun)");

    try {
        app.parse(argc, argv);
        if (discover->parsed()) return run_discover(d);
        if (benchmark->parsed()) return run_benchmark(b);
        if (experiment->parsed()) return run_experiment(e);
        if (rerun->parsed()) return run_rerun(rerun_manifest, rerun_out);
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return app.exit(err);  // --help
        app.exit(err);
        return kExitConfig;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const DataError& err) {
        std::cerr << "data error: " << err.what() << "\n";
        return kExitData;
    } catch (const ContractError& err) {
        std::cerr << "internal contract violation: " << err.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
