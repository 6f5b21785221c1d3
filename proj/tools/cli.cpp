#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fhlse/errors.hpp"
#include "fhlse/field.hpp"
#include "fhlse/level_set.hpp"
#include "fhlse/policy.hpp"
#include "fhlse/search.hpp"
#include "fhlse/sweep.hpp"

namespace fs = std::filesystem;

namespace fhlse::cli {

namespace {

/// A search or transect run hit its iteration cap.
class TimeoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t default_threads() {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Arguments

struct NoiseArgs {
    double flip = 0.0;
    double sigma = 0.0;

    StepNoise resolve() const {
        if (flip > 0.0 && sigma > 0.0) throw DomainError("--noise and --sigma are exclusive");
        if (sigma > 0.0) return {NoiseKind::gaussian, sigma};
        if (flip > 0.0) return {NoiseKind::flip, flip};
        return {};
    }
};

struct PolicyArgs {
    std::size_t n = 0;
    double lambda = 0.0;
    double epsilon = 0.0;
    double length = 1.0;
    std::size_t max_horizon = kDefaultMaxHorizon;
};

struct SearchArgs {
    std::string algo = "fhs";
    double theta = 0.5;
    double lambda = 0.0;
    std::optional<double> qs_m;
    std::size_t n = 0;
    double epsilon = 0.001;
    std::size_t budget = 0;
    NoiseArgs noise;
    std::size_t grid = kDefaultGridSize;
    std::size_t max_iterations = kDefaultMaxIterations;
    std::uint64_t seed = 0;
};

struct SweepArgs {
    std::string algo = "fhs";
    double lambda = 0.0;
    std::optional<double> qs_m;
    std::size_t n = 0;
    double epsilon = 0.0;
    std::size_t budget = 0;
    NoiseArgs noise;
    std::size_t thetas = 100;
    std::size_t trials = 100;
    bool fast = false;
    std::size_t grid = kDefaultGridSize;
    std::size_t max_iterations = kDefaultMaxIterations;
    double ts = 0.0;
    double tt = 0.0;
    std::uint64_t seed = 0;
    std::size_t threads = default_threads();
};

struct SelectArgs {
    double ts = 1.0;
    std::optional<double> tt;
    std::optional<double> ratio;
    double epsilon = 0.01;
    double length = 1.0;
    double noise = 0.0;
    std::vector<double> lambdas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
                                   1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9};
    std::size_t thetas = 100;
    std::size_t trials = 100;
    bool fast = false;
    std::size_t grid = 2000;
    std::size_t max_iterations = kDefaultMaxIterations;
    std::uint64_t seed = 0;
    std::size_t threads = default_threads();
};

struct FieldArgs {
    double lengthscale = 0.6;
    double boundary_variance = 1.0;
    double scale = 0.2;
    double margin = 0.02;
    double field_lengthscale = 0.1;
    std::size_t samples = 500;
    double field_noise = 1e-4;
    std::size_t rows = 21;
    std::size_t cols = 20;
    double cell_km = 1.0;
    double gamma = 0.0;
    double value_scale = 1.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    FieldGenParams params() const {
        FieldGenParams p;
        p.boundary_kernel = {.lengthscale = lengthscale, .variance = boundary_variance};
        p.boundary_scale = scale;
        p.boundary_margin = margin;
        p.field_lengthscale = field_lengthscale;
        p.dims = {rows, cols};
        p.n_field_samples = samples;
        p.field_noise = field_noise;
        p.gamma = gamma;
        p.value_scale = value_scale;
        p.sensor_sigma = sigma;
        p.cell_km = cell_km;
        p.seed = seed;
        return p;
    }
};

struct GplseArgs {
    FieldArgs gen;
    std::string field;
    std::optional<double> sigma;
    std::size_t transects = 5;
    double stop_error = 0.03;
    double lambda = 0.5;
    std::optional<double> boundary_lengthscale;
    std::optional<double> boundary_variance;
    std::optional<double> boundary_noise;
    std::size_t posterior_grid = kDefaultGridSize;
    std::size_t max_iterations = kDefaultMaxIterations;
    double ts = 0.0;
    std::optional<double> tt;
    std::optional<double> speed;
    std::uint64_t sensor_seed = 1;
};

struct ReplayArgs {
    std::string manifest;
};

void add_noise_options(CLI::App* app, NoiseArgs& noise) {
    app->add_option("--noise", noise.flip, "Label flip probability in [0, 1/2) (probability)");
    app->add_option("--sigma", noise.sigma,
                    "Gaussian measurement noise std dev; labels threshold at 1/2 (step units)");
}

void add_field_options(CLI::App* app, FieldArgs& f, bool with_sigma) {
    app->add_option("--lengthscale", f.lengthscale, "Boundary prior RBF lengthscale (unit square)");
    app->add_option("--prior-variance", f.boundary_variance,
                    "Boundary prior RBF variance (dimensionless)");
    app->add_option("--scale", f.scale, "Boundary = 0.5 + scale * prior draw (unit square)");
    app->add_option("--margin", f.margin,
                    "Reject boundaries closer than this to the square's edges (unit square)");
    app->add_option("--field-lengthscale", f.field_lengthscale,
                    "Lengthscale of the 2-D smoothing GP (unit square)");
    app->add_option("--field-samples", f.samples, "Random signed-distance samples (count)");
    app->add_option("--field-noise", f.field_noise,
                    "Noise variance added to signed distances (unit square squared)");
    app->add_option("--rows", f.rows, "Grid rows along the first coordinate (count)");
    app->add_option("--cols", f.cols, "Grid columns along the second coordinate (count)");
    app->add_option("--cell-km", f.cell_km, "Physical node spacing (km)");
    app->add_option("--gamma", f.gamma, "Level threshold (field units)");
    app->add_option("--value-scale", f.value_scale,
                    "Field value = gamma + value-scale * signed distance (field units per unit)");
    if (with_sigma) {
        app->add_option("--sigma", f.sigma, "Sensor noise std dev stored with the field (field units)");
    }
    app->add_option("--seed", f.seed, "Field generation seed (integer)");
}

// ---------------------------------------------------------------------------
// Output directory and manifest

fs::path make_run_dir(const std::string& root_flag, const std::string& subcommand) {
    fs::path root;
    if (!root_flag.empty()) {
        root = root_flag;
    } else if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') {
        root = env;
    } else {
        root = "runs";
    }
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
    const std::string base = fmt::format("{}-{}", subcommand, stamp);

    fs::create_directories(root);
    for (int attempt = 0;; ++attempt) {
        const fs::path dir = root / (attempt == 0 ? base : fmt::format("{}-{}", base, attempt));
        if (fs::create_directory(dir)) return dir;
    }
}

std::string option_value(const CLI::Option* opt) {
    if (opt->get_type_size_max() == 0) {
        return opt->count() > 0 && opt->as<bool>() ? "true" : "false";
    }
    if (opt->count() == 0) {
        std::string value = opt->get_default_str();
        // Container defaults are rendered as [a,b,...].
        if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
            value = value.substr(1, value.size() - 2);
        }
        return value;
    }
    std::string joined;
    for (const std::string& r : opt->results()) {
        if (!joined.empty()) joined += ',';
        joined += r;
    }
    return joined;
}

void write_manifest(const fs::path& dir, const CLI::App* sub) {
    std::ofstream out(dir / "manifest.txt");
    out << "# run manifest; replay with: fhlse replay --manifest <this file>\n";
    out << "command=" << sub->get_name() << '\n';
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "out") continue;
        const std::string value = option_value(opt);
        if (value.empty() || value == "[]") continue;
        out << name << '=' << value << '\n';
    }
    if (!out) throw std::runtime_error(fmt::format("cannot write manifest in '{}'", dir.string()));
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands

void write_policy_csv(const fs::path& path, const Policy& policy, const PolicyDiagnostics& d) {
    auto out = open_output(path);
    out << "step,fraction,xi,rho\n";
    for (std::size_t k = 0; k < policy.size(); ++k) {
        fmt::print(out, "{},{:.17g},{:.17g},{:.17g}\n", k + 1, policy.fractions[k], d.xi[k],
                   d.rho[k]);
    }
}

void print_policy(std::ostream& out, const Policy& policy, const PolicyDiagnostics& d) {
    fmt::print(out, "{:>5} {:>12} {:>12} {:>12}\n", "step", "fraction", "xi", "rho");
    for (std::size_t k = 0; k < policy.size(); ++k) {
        fmt::print(out, "{:>5} {:>12.8f} {:>12.8f} {:>12.8f}\n", k + 1, policy.fractions[k],
                   d.xi[k], d.rho[k]);
    }
    fmt::print(out, "steps={} lambda={} expected_length={:.10g} expected_distance={:.10g} "
                    "expected_cost={:.10g}\n",
               policy.size(), policy.lambda, d.expected_length, d.expected_distance,
               d.expected_cost);
}

int cmd_policy(const PolicyArgs& a, const fs::path& dir, std::ostream& out) {
    if ((a.n > 0) == (a.epsilon > 0.0)) {
        throw DomainError("give exactly one of --n and --epsilon");
    }
    const Policy policy = a.n > 0 ? compute_policy(a.n, a.lambda)
                                  : policy_for_error(a.epsilon, a.lambda, a.length, a.max_horizon);
    const PolicyDiagnostics d = diagnose(policy, a.length);
    print_policy(out, policy, d);
    write_policy_csv(dir / "policy.csv", policy, d);
    return kExitOk;
}

SweepParams base_params(const std::string& algo, double lambda, std::optional<double> qs_m,
                        std::size_t n, double epsilon, std::size_t budget, const NoiseArgs& noise,
                        std::size_t grid, std::size_t max_iterations) {
    SweepParams p;
    p.algorithm = parse_algorithm(algo);
    p.lambda = lambda;
    p.qs_m = qs_m;
    p.horizon = n;
    p.epsilon = epsilon;
    p.sample_budget = budget;
    p.noise = noise.resolve();
    p.grid_size = grid;
    p.max_iterations = max_iterations;
    return p;
}

int cmd_search(const SearchArgs& a, const fs::path& dir, std::ostream& out) {
    SweepParams p = base_params(a.algo, a.lambda, a.qs_m, a.n, a.epsilon, a.budget, a.noise,
                                a.grid, a.max_iterations);
    if (p.epsilon == 0.0 && p.sample_budget == 0) {
        throw DomainError("give --epsilon or --budget");
    }
    const Policy policy = sweep_policy(p);
    StepOracle oracle(a.theta, p.noise, a.seed);
    const SearchTrace trace = run_search(p, policy, oracle);

    auto csv = open_output(dir / "trace.csv");
    write_trace_csv(csv, trace);
    fmt::print(out, "algo={} theta={} estimate={:.10g} error={:.10g} samples={} distance={:.10g} "
                    "spread={:.10g} status={}\n",
               a.algo, a.theta, trace.estimate, std::abs(trace.estimate - a.theta),
               trace.sample_count, trace.total_distance, trace.final_spread,
               to_string(trace.status));
    if (trace.status == SearchStatus::timeout) {
        throw TimeoutError(fmt::format("search hit the iteration cap ({})", a.max_iterations));
    }
    return kExitOk;
}

void print_summary(std::ostream& out, const CostReport& report) {
    const SweepSummary s = report.summary();
    fmt::print(out,
               "algo={} lambda={:.10g} noise={} trials={} samples_mean={:.10g} "
               "distance_mean={:.10g} error_mean={:.10g} cost_mean={:.10g} time_mean={:.10g}\n",
               to_string(report.algorithm), report.lambda, report.noise, s.trials, s.samples.mean,
               s.distance.mean, s.error.mean, s.cost.mean, s.time.mean);
}

int cmd_sweep(const SweepArgs& a, const fs::path& dir, std::ostream& out) {
    SweepParams p = base_params(a.algo, a.lambda, a.qs_m, a.n, a.epsilon, a.budget, a.noise,
                                a.grid, a.max_iterations);
    p.thetas = theta_grid(a.fast ? 20 : a.thetas);
    p.trials = a.fast ? 20 : a.trials;
    p.sample_time = a.ts;
    p.travel_time = a.tt;
    p.seed = a.seed;
    p.threads = a.threads;
    const CostReport report = run_sweep(p);

    auto csv = open_output(dir / "sweep.csv");
    write_report_csv(csv, report);
    auto summary = open_output(dir / "sweep_summary.csv");
    write_summary_csv(summary, report);
    print_summary(out, report);

    std::size_t timeouts = 0;
    for (const TrialRecord& r : report.records) {
        if (r.status == SearchStatus::timeout) ++timeouts;
    }
    if (timeouts > 0) {
        throw TimeoutError(fmt::format("{} of {} trials hit the iteration cap", timeouts,
                                       report.records.size()));
    }
    return kExitOk;
}

int cmd_select_lambda(const SelectArgs& a, const fs::path& dir, std::ostream& out) {
    if (a.tt && a.ratio) throw DomainError("--tt and --ratio are exclusive");
    const double tt = a.tt ? *a.tt : a.ratio ? *a.ratio * a.ts : 0.0;

    LambdaSelection selection;
    if (a.noise > 0.0) {
        if (a.length != 1.0) throw DomainError("noisy cost tables are measured on --length 1");
        SweepParams base;
        base.algorithm = Algorithm::pfhs;
        base.noise = {NoiseKind::flip, a.noise};
        base.epsilon = a.epsilon;
        base.thetas = theta_grid(a.fast ? 20 : a.thetas);
        base.trials = a.fast ? 20 : a.trials;
        base.grid_size = a.grid;
        base.max_iterations = a.max_iterations;
        base.seed = a.seed;
        base.threads = a.threads;
        const std::vector<CostTableEntry> table = cost_table(base, a.lambdas);
        selection = select_lambda(a.ts, tt, a.epsilon, a.length, a.lambdas,
                                  std::span<const CostTableEntry>(table));
    } else {
        selection = select_lambda(a.ts, tt, a.epsilon, a.length, a.lambdas);
    }

    auto csv = open_output(dir / "candidates.csv");
    csv << "lambda,samples,distance,time\n";
    for (const LambdaCandidate& c : selection.candidates) {
        fmt::print(csv, "{:.17g},{:.17g},{:.17g},{:.17g}\n", c.lambda, c.samples, c.distance,
                   c.time);
    }
    const PolicyDiagnostics d = diagnose(selection.policy, a.length);
    write_policy_csv(dir / "policy.csv", selection.policy, d);

    fmt::print(out, "lambda_star={:.10g} ts={} tt={} epsilon={} noise={}\n", selection.lambda, a.ts,
               tt, a.epsilon, a.noise);
    print_policy(out, selection.policy, d);
    return kExitOk;
}

void write_boundary_samples(const fs::path& path, const std::vector<double>& boundary) {
    auto out = open_output(path);
    out << "first,boundary\n";
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        fmt::print(out, "{:.17g},{:.17g}\n",
                   static_cast<double>(i) / static_cast<double>(boundary.size() - 1), boundary[i]);
    }
}

int cmd_genfield(const FieldArgs& a, const fs::path& dir, std::ostream& out) {
    const GeneratedField g = generate_gp_field(a.params());
    save_grid_field(dir / "field.csv", g.field);
    write_boundary_samples(dir / "boundary.csv", g.boundary);
    const LevelSetEstimate truth = g.truth();
    auto csv = open_output(dir / "truth.csv");
    write_classification_csv(csv, truth);

    std::size_t super = 0;
    for (auto v : truth.super) super += v;
    const LevelSetEstimate by_value = g.field.level_set();
    fmt::print(out, "rows={} cols={} boundary_seed={} attempts={} super_fraction={:.6f} "
                    "grid_vs_boundary_error={:.6f}\n",
               g.field.dims.rows, g.field.dims.cols, g.seed, g.attempts,
               static_cast<double>(super) / static_cast<double>(truth.super.size()),
               level_set_error(truth, by_value));
    return kExitOk;
}

int cmd_gplse(const GplseArgs& a, const fs::path& dir, std::ostream& out) {
    if (a.tt && a.speed) throw DomainError("--tt and --speed are exclusive");
    if (a.speed && !(*a.speed > 0.0)) throw DomainError("--speed must be positive");
    const double tt = a.tt ? *a.tt : a.speed ? 3600.0 / *a.speed : 0.0;
    time_cost(0.0, 0.0, a.ts, tt);

    GridField field;
    LevelSetEstimate truth;
    KernelSpec boundary_kernel{.lengthscale = 1.0, .variance = 1.0};
    if (!a.field.empty()) {
        field = load_grid_field(a.field);
        truth = field.level_set();
    } else {
        const FieldGenParams params = a.gen.params();
        const GeneratedField g = generate_gp_field(params);
        field = g.field;
        truth = g.truth();
        boundary_kernel = {.lengthscale = params.boundary_kernel.lengthscale,
                           .variance = params.boundary_kernel.variance * params.boundary_scale *
                                       params.boundary_scale};
        save_grid_field(dir / "field.csv", field);
    }
    if (a.boundary_lengthscale) boundary_kernel.lengthscale = *a.boundary_lengthscale;
    if (a.boundary_variance) boundary_kernel.variance = *a.boundary_variance;
    const double sigma = a.sigma.value_or(field.sigma);

    TransectConfig config;
    config.n_transects = a.transects;
    config.stop_error = a.stop_error;
    config.lambda = a.lambda;
    config.boundary_kernel = boundary_kernel;
    config.boundary_noise_variance = a.boundary_noise;
    config.grid = field.dims;
    config.posterior_grid = a.posterior_grid;
    config.max_iterations = a.max_iterations;
    config.extent_first = field.extent_first();
    config.extent_second = field.extent_second();

    NoisyField oracle([&field](double f, double s) { return field.interpolate(f, s); }, sigma,
                      a.sensor_seed);
    const auto started = std::chrono::steady_clock::now();
    const LseResult result = transect_lse(std::ref(oracle),
                                          NoiseModel{.sigma = sigma, .threshold = field.gamma},
                                          config);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const double error = level_set_error(truth, result.estimate);
    const double time = time_cost(static_cast<double>(result.total_samples),
                                  result.total_distance, a.ts, tt);

    {
        auto csv = open_output(dir / "boundary.csv");
        write_boundary_csv(csv, result.estimate);
    }
    {
        auto csv = open_output(dir / "classification.csv");
        write_classification_csv(csv, result.estimate);
    }
    {
        auto csv = open_output(dir / "transects.csv");
        csv << "transect,first,step,second,raw,label,estimate,cumulative_distance\n";
        for (std::size_t t = 0; t < result.transects.size(); ++t) {
            const TransectRun& run = result.transects[t];
            for (const SearchStep& s : run.trace.steps) {
                fmt::print(csv, "{},{:.17g},{},{:.17g},{:.17g},{},{:.17g},{:.17g}\n", t,
                           run.coordinate, s.index, s.x, s.raw, s.label, s.estimate,
                           s.cumulative_distance);
            }
        }
    }
    {
        auto csv = open_output(dir / "summary.csv");
        csv << "transects,samples,distance_km,error,time_s,timed_out\n";
        fmt::print(csv, "{},{},{:.17g},{:.17g},{:.17g},{}\n", result.transects.size(),
                   result.total_samples, result.total_distance, error, time,
                   result.timed_out ? 1 : 0);
    }
    fmt::print(out, "transects={} samples={} distance_km={:.6g} error={:.6f} time_s={:.6g} "
                    "wall_s={:.4f}\n",
               result.transects.size(), result.total_samples, result.total_distance, error, time,
               wall);
    if (result.timed_out) throw TimeoutError("a transect hit the iteration cap");
    return kExitOk;
}

std::vector<std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open manifest '{}'", path));
    std::string command;
    std::vector<std::string> flags;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParseError("manifest lines must be key=value", line_no, 1);
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "command") {
            command = value;
        } else {
            flags.push_back(fmt::format("--{}={}", key, value));
        }
    }
    if (command.empty()) throw ParseError("manifest has no command line", line_no, 1);
    if (command == "replay") throw DomainError("a manifest cannot replay a replay");
    flags.insert(flags.begin(), command);
    return flags;
}

// ---------------------------------------------------------------------------

int report(std::ostream& err, int code, std::string_view message) {
    fmt::print(err, "error: {}\n", message);
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-horizon search and transect level-set estimation", "fhlse"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    std::string out_root;
    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", out_root,
                        fmt::format("Output root; runs go to <root>/<command>-<UTC timestamp>/ "
                                    "(default ${} or ./runs) (path)",
                                    kOutputRootEnv));
    };

    PolicyArgs pa;
    auto* policy = app.add_subcommand("policy", "Compute an optimal sampling-fraction policy");
    policy->add_option("--n", pa.n, "Fixed horizon; exclusive with --epsilon (samples)");
    policy->add_option("--lambda", pa.lambda, "Distance penalty in [0,2) (cost per unit length)")
        ->required();
    policy->add_option("--epsilon", pa.epsilon,
                       "Target expected final interval length (same units as --length)");
    policy->add_option("--length", pa.length, "Initial interval length (length units)");
    policy->add_option("--max-horizon", pa.max_horizon, "Longest policy allowed (samples)");
    add_out(policy);

    SearchArgs sa;
    auto* search = app.add_subcommand("search", "Run one change-point search");
    search->add_option("--algo", sa.algo, "Algorithm: fhs, pfhs, qs or pqs (tag)");
    search->add_option("--theta", sa.theta, "True change point in [0,1] (unit interval)")
        ->required();
    search->add_option("--lambda", sa.lambda, "Distance penalty in [0,2) (cost per unit length)");
    search->add_option("--qs-m", sa.qs_m, "QS divisor m >= 2; qs/pqs sample 1/m (dimensionless)");
    search->add_option("--n", sa.n, "Optimal fixed-horizon policy length; 0 sizes it from "
                                    "--epsilon (samples)");
    search->add_option("--epsilon", sa.epsilon,
                       "Target final interval length; posterior searches stop at "
                       "4 E|error| <= epsilon (unit interval)");
    search->add_option("--budget", sa.budget, "Fixed number of samples, 0 = none (samples)");
    add_noise_options(search, sa.noise);
    search->add_option("--grid", sa.grid, "Posterior bins (count)");
    search->add_option("--max-iterations", sa.max_iterations,
                       "Samples before giving up with a timeout (samples)");
    search->add_option("--seed", sa.seed, "Measurement noise seed (integer)");
    add_out(search);

    SweepArgs wa;
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over change points");
    sweep->add_option("--algo", wa.algo, "Algorithm: fhs, pfhs, qs or pqs (tag)");
    sweep->add_option("--lambda", wa.lambda, "Distance penalty in [0,2) (cost per unit length)");
    sweep->add_option("--qs-m", wa.qs_m, "QS divisor m >= 2 (dimensionless)");
    sweep->add_option("--n", wa.n, "Optimal fixed-horizon policy length; 0 sizes it from "
                                   "--epsilon (samples)");
    sweep->add_option("--epsilon", wa.epsilon,
                      "Target final interval length; posterior searches stop at "
                      "4 E|error| <= epsilon (unit interval)");
    sweep->add_option("--budget", wa.budget, "Fixed number of samples per trial (samples)");
    add_noise_options(sweep, wa.noise);
    sweep->add_option("--thetas", wa.thetas, "Change points i/(G+1), i = 1..G (count)");
    sweep->add_option("--trials", wa.trials, "Trials per change point (count)");
    sweep->add_flag("--fast", wa.fast, "Use 20 change points x 20 trials (flag)");
    sweep->add_option("--grid", wa.grid, "Posterior bins (count)");
    sweep->add_option("--max-iterations", wa.max_iterations, "Samples before timeout (samples)");
    sweep->add_option("--ts", wa.ts, "Time per sample (s)");
    sweep->add_option("--tt", wa.tt, "Time per unit distance (s per unit length)");
    sweep->add_option("--seed", wa.seed, "Base seed for per-trial streams (integer)");
    sweep->add_option("--threads", wa.threads, "Worker threads (count)");
    add_out(sweep);

    SelectArgs la;
    auto* select = app.add_subcommand("select-lambda", "Pick the time-optimal distance penalty");
    select->add_option("--ts", la.ts, "Time per sample (s)");
    select->add_option("--tt", la.tt, "Time per unit distance (s per unit length)");
    select->add_option("--ratio", la.ratio, "Travel/sample time ratio; sets tt = ratio * ts "
                                            "(dimensionless)");
    select->add_option("--epsilon", la.epsilon, "Target final interval length (length units)");
    select->add_option("--length", la.length, "Initial interval length (length units)");
    select->add_option("--noise", la.noise,
                       "Flip probability; > 0 measures samples/distance by PFHS sweeps "
                       "(probability)");
    select->add_option("--lambdas", la.lambdas, "Candidate penalties, comma separated "
                                                "(cost per unit length)")
        ->delimiter(',');
    select->add_option("--thetas", la.thetas, "Noisy sweeps: change points (count)");
    select->add_option("--trials", la.trials, "Noisy sweeps: trials per change point (count)");
    select->add_flag("--fast", la.fast, "Noisy sweeps: 20 change points x 20 trials (flag)");
    select->add_option("--grid", la.grid, "Noisy sweeps: posterior bins (count)");
    select->add_option("--max-iterations", la.max_iterations, "Samples before timeout (samples)");
    select->add_option("--seed", la.seed, "Base seed (integer)");
    select->add_option("--threads", la.threads, "Worker threads (count)");
    add_out(select);

    FieldArgs fa;
    auto* genfield = app.add_subcommand("genfield", "Generate a synthetic level-set field");
    add_field_options(genfield, fa, true);
    add_out(genfield);

    GplseArgs ga;
    auto* gplse = app.add_subcommand("gplse", "Transect level-set estimation on a grid field");
    gplse->add_option("--field", ga.field,
                      "Grid field CSV; without it a field is generated from the field flags "
                      "(path)");
    add_field_options(gplse, ga.gen, false);
    gplse->add_option("--sigma", ga.sigma,
                      "Sensor noise std dev; default: the field file's sigma, else 0 "
                      "(field units)");
    gplse->add_option("--transects", ga.transects, "Number of transects (count)");
    gplse->add_option("--stop-error", ga.stop_error,
                      "Per-transect posterior E|error| stop rule (unit square)");
    gplse->add_option("--lambda", ga.lambda, "Distance penalty in [0,2) (cost per unit length)");
    gplse->add_option("--boundary-lengthscale", ga.boundary_lengthscale,
                      "Boundary GP lengthscale; default: generating one, or 1 (unit square)");
    gplse->add_option("--boundary-variance", ga.boundary_variance,
                      "Boundary GP variance; default: generating one, or 1 (unit square squared)");
    gplse->add_option("--boundary-noise", ga.boundary_noise,
                      "Boundary GP noise variance; default (stop-error/2)^2 (unit square squared)");
    gplse->add_option("--posterior-grid", ga.posterior_grid, "Posterior bins (count)");
    gplse->add_option("--max-iterations", ga.max_iterations,
                      "Samples per transect before timeout (samples)");
    gplse->add_option("--ts", ga.ts, "Time per sample (s)");
    gplse->add_option("--tt", ga.tt, "Time per km travelled (s/km)");
    gplse->add_option("--speed", ga.speed, "Travel speed; sets tt = 3600/speed (km/h)");
    gplse->add_option("--sensor-seed", ga.sensor_seed, "Sensor noise seed (integer)");
    add_out(gplse);

    ReplayArgs ra;
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("--manifest", ra.manifest, "Manifest written by an earlier run (path)")
        ->required();
    add_out(replay);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return report(err, kExitUsage, e.what());
    }

    try {
        if (replay->parsed()) {
            std::vector<std::string> replayed = read_manifest(ra.manifest);
            if (!out_root.empty()) replayed.push_back("--out=" + out_root);
            return run_cli(replayed, out, err);
        }
        CLI::App* sub = app.get_subcommands().front();
        const fs::path dir = make_run_dir(out_root, sub->get_name());
        write_manifest(dir, sub);
        fmt::print(out, "output={}\n", dir.string());
        if (policy->parsed()) return cmd_policy(pa, dir, out);
        if (search->parsed()) return cmd_search(sa, dir, out);
        if (sweep->parsed()) return cmd_sweep(wa, dir, out);
        if (select->parsed()) return cmd_select_lambda(la, dir, out);
        if (genfield->parsed()) return cmd_genfield(fa, dir, out);
        if (gplse->parsed()) return cmd_gplse(ga, dir, out);
        return report(err, kExitUsage, "no subcommand");
    } catch (const TimeoutError& e) {
        return report(err, kExitRuntime, fmt::format("timeout: {}", e.what()));
    } catch (const std::logic_error& e) {
        // DomainError and ContractViolation both derive from logic_error.
        return report(err, kExitUsage, e.what());
    } catch (const ParseError& e) {
        return report(err, kExitRuntime, e.what());
    } catch (const std::exception& e) {
        return report(err, kExitRuntime, e.what());
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

}  // namespace fhlse::cli
