#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "spl/kvdoc.hpp"
#include "spl/numdata.hpp"

namespace fs = std::filesystem;
using namespace spl;

namespace {

std::string bin() {
    const char* env = std::getenv("SPL_BIN");
    REQUIRE(env != nullptr);
    return env;
}

std::string config_dir() {
    const char* env = std::getenv("SPL_CONFIG_DIR");
    return env ? env : "configs";
}

int run_cmd(const std::string& args) {
    const std::string cmd = bin() + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_toy_csv(const std::string& path, int points) {
    Rng rng(99);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < points; ++i) {
        const double x = rng.uniform(-10.0, 10.0);
        rows.push_back({format_double(x), format_double(0.3 * x * x * x + 0.5 * x * x + 2 * x)});
    }
    write_csv(path, {"x", "target"}, rows);
}

/// Hanging double pendulum (unit masses and lengths): synthetic stand-in for
/// the camera-extracted state records.
void write_pendulum_csv(const std::string& path) {
    const double g = 9.81;
    auto rhs = [&](double, std::span<const double> s, std::span<double> d) {
        const double th1 = s[0], th2 = s[1], w1 = s[2], w2 = s[3];
        const double delta = th1 - th2;
        const double den = 2.0 - std::cos(2.0 * delta);
        d[0] = w1;
        d[1] = w2;
        d[2] = (-3.0 * g * std::sin(th1) - g * std::sin(th1 - 2.0 * th2) -
                2.0 * std::sin(delta) * (w2 * w2 + w1 * w1 * std::cos(delta))) /
               den;
        d[3] = (2.0 * std::sin(delta) *
                (2.0 * w1 * w1 + 2.0 * g * std::cos(th1) + w2 * w2 * std::cos(delta))) /
               den;
    };
    const std::vector<double> s0 = {1.2, -0.6, 0.0, 0.0};
    Trajectory traj = integrate_ode(rhs, s0, 0.0, 4.0, 0.002);
    std::vector<std::vector<std::string>> rows;
    std::vector<double> d(4);
    for (std::size_t i = 0; i < traj.times.size(); i += 2) {
        const double s[4] = {traj.states[0][i], traj.states[1][i], traj.states[2][i],
                             traj.states[3][i]};
        rhs(traj.times[i], s, d);
        rows.push_back({format_double(s[0]), format_double(s[1]), format_double(s[2]),
                        format_double(s[3]), format_double(d[2]), format_double(d[3])});
    }
    write_csv(path, {"th1", "th2", "w1", "w2", "dw1", "dw2"}, rows);
}

}  // namespace

TEST_CASE("cli: usage and config errors exit 2") {
    CHECK(run_cmd("discover") == 2);
    CHECK(run_cmd("discover --data x.csv") == 2);  // missing --grammar
    write_toy_csv("cli_toy.csv", 30);
    CHECK(run_cmd("discover --data cli_toy.csv --grammar " + config_dir() +
                  "/toy_arith.g --episodes 0") == 2);
    CHECK(run_cmd("benchmark --suite nosuch") == 2);
    CHECK(run_cmd("benchmark --suite nguyen --only 99 --trials 1") == 2);
    CHECK(run_cmd("experiment --name nosuch") == 2);
    CHECK(run_cmd("experiment --name lorenz --config /nonexistent.cfg") == 2);
}

TEST_CASE("cli: data errors exit 3") {
    CHECK(run_cmd("discover --data /nonexistent.csv --grammar " + config_dir() +
                  "/toy_arith.g") == 3);
    CHECK(run_cmd("experiment --name balldrop --data /nonexistent_dir") == 3);
    CHECK(run_cmd("experiment --name pendulum --data /nonexistent.csv") == 3);
}

TEST_CASE("cli: discover produces outputs, is seed-deterministic, reruns byte-identically") {
    write_toy_csv("cli_toy.csv", 60);
    const std::string base = "discover --data cli_toy.csv --grammar " + config_dir() +
                             "/toy_arith.g --episodes 400 --seed 11";
    REQUIRE(run_cmd(base + " --out cli_run_a") == 0);
    REQUIRE(fs::exists("cli_run_a/equation.txt"));
    REQUIRE(fs::exists("cli_run_a/trace.csv"));
    REQUIRE(fs::exists("cli_run_a/manifest.txt"));

    KvDoc manifest = KvDoc::load("cli_run_a/manifest.txt");
    CHECK(manifest.get("command") == "discover");
    CHECK(manifest.get_int("arg.seed") == 11);

    // same seed, fresh run: identical outputs
    REQUIRE(run_cmd(base + " --out cli_run_b") == 0);
    CHECK(slurp("cli_run_a/trace.csv") == slurp("cli_run_b/trace.csv"));
    CHECK(slurp("cli_run_a/equation.txt") == slurp("cli_run_b/equation.txt"));

    // rerun from the manifest: identical outputs again
    REQUIRE(run_cmd("rerun cli_run_a/manifest.txt --out cli_run_c") == 0);
    CHECK(slurp("cli_run_a/trace.csv") == slurp("cli_run_c/trace.csv"));
    CHECK(slurp("cli_run_a/equation.txt") == slurp("cli_run_c/equation.txt"));
}

TEST_CASE("cli: benchmark nguyen subset emits per-task and summary reports") {
    REQUIRE(run_cmd("benchmark --suite nguyen --only 8 --trials 2 --scale desk --seed 5 "
                    "--out cli_bench") == 0);
    REQUIRE(fs::exists("cli_bench/recovery_nguyen-8.csv"));
    REQUIRE(fs::exists("cli_bench/summary.csv"));
    const std::string summary = slurp("cli_bench/summary.csv");
    CHECK(summary.rfind("task,trials,successes,recovery_rate", 0) == 0);
    CHECK(summary.find("nguyen-8,2,") != std::string::npos);
}

TEST_CASE("cli: grid benchmark emits the lattice csv") {
    // one tiny cell grid through the config surface
    REQUIRE(run_cmd("benchmark --suite grid --trials 1 --seed 3 --out cli_grid") == 0);
    const std::string grid = slurp("cli_grid/grid.csv");
    CHECK(grid.rfind("noise,points,recovery_rate", 0) == 0);
    // 4 noise levels x 4 volumes
    int lines = 0;
    for (char c : grid)
        if (c == '\n') ++lines;
    CHECK(lines == 17);
}

TEST_CASE("cli: lorenz experiment writes the support report") {
    KvDoc cfg;
    cfg.add("trials", "1");
    cfg.add("episodes", "60");
    cfg.add("t_end", "2.0");
    cfg.add("sims", "5");
    cfg.save("cli_lorenz.cfg");
    REQUIRE(run_cmd("experiment --name lorenz --config cli_lorenz.cfg --seed 1 "
                    "--out cli_lorenz") == 0);
    const std::string report = slurp("cli_lorenz/lorenz_support.csv");
    CHECK(report.rfind("trial,dimension,support_exact,false_positives", 0) == 0);
    CHECK(report.find("dx") != std::string::npos);
    CHECK(report.find("dz") != std::string::npos);
}

TEST_CASE("cli: balldrop runs offline on the synthetic generator") {
    KvDoc cfg;
    cfg.add("episodes", "150");
    cfg.save("cli_ball.cfg");
    REQUIRE(run_cmd("experiment --name balldrop --synthetic --config cli_ball.cfg --seed 2 "
                    "--out cli_ball") == 0);
    const std::string report = slurp("cli_ball/balldrop_mse.csv");
    CHECK(report.rfind("ball,mse_spl,mse_model1,mse_model2,mse_model3", 0) == 0);
    CHECK(report.find("synthetic_low_drag") != std::string::npos);
}

TEST_CASE("cli: pendulum experiment runs on user state records") {
    write_pendulum_csv("cli_pendulum.csv");
    KvDoc cfg;
    cfg.add("episodes", "200");
    cfg.add("grammar_dir", config_dir());
    cfg.save("cli_pend.cfg");
    REQUIRE(run_cmd("experiment --name pendulum --data cli_pendulum.csv --config cli_pend.cfg "
                    "--seed 4 --out cli_pend") == 0);
    REQUIRE(fs::exists("cli_pend/pendulum_equations.txt"));
    KvDoc eq = KvDoc::load("cli_pend/pendulum_equations.txt");
    CHECK(eq.has("dw1"));
    CHECK(eq.has("dw2"));
}
