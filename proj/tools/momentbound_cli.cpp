// Command-line frontend: moment-relaxation bounds on stationary averages of
// polynomial diffusions, Lyapunov-exponent certification, oscillator
// reliability bounds, posterior inference, closed-form oracles, path
// simulation and canonical problem export.

#include "momentbound/applications.hpp"
#include "momentbound/conic.hpp"
#include "momentbound/lyapunov.hpp"
#include "momentbound/specfile.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <functional>
#include <iostream>
#include <thread>

using namespace momentbound;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpecError = 2;
constexpr int kExitSolverError = 3;

struct OutputOptions {
    std::string format = "csv";
    std::string out_path;
};

void add_output_flags(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_option("--format", opts.format, "Report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", opts.out_path, "Write the report to FILE (atomic)");
}

int emit(const Report& report, const OutputOptions& opts) {
    std::string text = opts.format == "json" ? report.to_json() : report.to_csv();
    if (opts.out_path.empty()) {
        std::cout << text;
    } else {
        write_file_atomic(opts.out_path, text);
    }
    return kExitOk;
}

// Bounded fan-out over indexed jobs; results land in caller-owned slots so
// reports stay order-deterministic.
void parallel_for(size_t count, unsigned workers, const std::function<void(size_t)>& job) {
    if (workers <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(count));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t)
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= count) return;
                job(i);
            }
        });
    for (auto& th : pool) th.join();
}

std::vector<Rat> parse_scale_list(const std::string& text) {
    std::vector<Rat> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(rat_from_string(item));
    return out;
}

MomentProblem assemble_from_spec(const ProblemSpec& spec, int degree) {
    SdeModel model = spec.model();
    MomentProblem prob;
    if (!spec.pieces.empty()) {
        prob = assemble_piecewise(model, spec.pieces, degree);
    } else if (spec.objective) {
        prob = assemble_outer(model, *spec.objective, degree);
    } else {
        throw SpecError("spec file has no objective");
    }
    if (spec.scale) prob = rescale(prob, *spec.scale).problem;
    return prob;
}

struct BoundRow {
    int degree = 0;
    BoundPair bounds;
};

int cmd_bound(const std::string& spec_path, int degree_flag, const std::string& range_flag,
              double tolerance_flag, const std::string& scale_flag, unsigned workers,
              const OutputOptions& opts) {
    ProblemSpec spec;
    std::vector<int> degrees;
    try {
        spec = load_problem_spec(spec_path);
        if (tolerance_flag > 0) spec.solver.tolerance = tolerance_flag;
        if (!scale_flag.empty()) spec.scale = parse_scale_list(scale_flag);

        if (!range_flag.empty()) {
            auto colon = range_flag.find(':');
            if (colon == std::string::npos) throw SpecError("--degree-range wants LO:HI");
            int lo = std::stoi(range_flag.substr(0, colon));
            int hi = std::stoi(range_flag.substr(colon + 1));
            if (lo > hi) throw SpecError("--degree-range wants LO <= HI");
            for (int d = lo; d <= hi; ++d) degrees.push_back(d);
        } else if (degree_flag > 0) {
            degrees.push_back(degree_flag);
        } else if (spec.degree_range) {
            for (int d = spec.degree_range->first; d <= spec.degree_range->second; ++d)
                degrees.push_back(d);
        } else if (spec.degree) {
            degrees.push_back(*spec.degree);
        } else {
            throw SpecError("no relaxation degree given (spec file or --degree)");
        }
        // validate assembly up front so degree errors exit before any solve
        for (int d : degrees) assemble_from_spec(spec, d);
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    }

    std::vector<BoundRow> rows(degrees.size());
    std::atomic<bool> failed{false};
    parallel_for(degrees.size(), workers, [&](size_t i) {
        BoundRow row;
        row.degree = degrees[i];
        MomentProblem prob = assemble_from_spec(spec, row.degree);
        if (!spec.pieces.empty()) {
            row.bounds = detail::solve_piecewise_upper(prob, spec.solver, Rat(1));
        } else {
            row.bounds = lower_and_upper(prob, spec.solver);
        }
        if (row.bounds.lower.status == SolveStatus::NumericalFailure ||
            row.bounds.upper.status == SolveStatus::NumericalFailure)
            failed = true;
        rows[i] = std::move(row);
    });

    // monotonicity is a property of the nested family; a violation beyond
    // solver slack is flagged as an accuracy warning
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].bounds.rho() < rows[i - 1].bounds.rho() - 1e-6)
            std::cerr << "warning: lower bound decreased from degree " << rows[i - 1].degree
                      << " to " << rows[i].degree << " beyond solver slack\n";
        if (rows[i].bounds.eta() > rows[i - 1].bounds.eta() + 1e-6)
            std::cerr << "warning: upper bound increased from degree " << rows[i - 1].degree
                      << " to " << rows[i].degree << " beyond solver slack\n";
    }

    Report report;
    report.metadata.emplace_back("spec", spec_path);
    report.metadata.emplace_back("backend", kSolverBackend);
    report.columns = {"degree",     "rho",           "eta",        "status_rho",
                      "status_eta", "solve_seconds", "fingerprint"};
    for (const auto& row : rows) {
        ReportRecord rec;
        rec.add("degree", static_cast<long>(row.degree));
        rec.add("rho", row.bounds.rho());
        rec.add("eta", row.bounds.eta());
        rec.add("status_rho", to_string(row.bounds.lower.status));
        rec.add("status_eta", to_string(row.bounds.upper.status));
        rec.add("solve_seconds", row.bounds.lower.seconds + row.bounds.upper.seconds, 4);
        rec.add("fingerprint", row.bounds.fingerprint);
        report.records.push_back(std::move(rec));
    }
    int rc = emit(report, opts);
    return failed ? kExitSolverError : rc;
}

int cmd_lyapunov(const std::string& system_path, double c1, double c2,
                 const std::string& sigma_flag, const std::string& sigma_range, int degree,
                 unsigned workers, const OutputOptions& opts) {
    std::vector<Rat> sigmas;
    std::optional<LinearNoiseSystem> fixed_system;
    try {
        if (!system_path.empty()) {
            std::ifstream in(system_path);
            if (!in) throw SpecError("cannot open system file: " + system_path);
            nlohmann::json doc;
            in >> doc;
            LinearNoiseSystem sys;
            sys.n = doc.at("n").get<int>();
            auto read_matrix = [&](const nlohmann::json& j) {
                std::vector<std::vector<Rat>> m;
                for (const auto& row : j) {
                    std::vector<Rat> r;
                    for (const auto& cell : row)
                        r.push_back(cell.is_string() ? rat_from_string(cell.get<std::string>())
                                                     : rat_from_double(cell.get<double>()));
                    m.push_back(std::move(r));
                }
                return m;
            };
            sys.A = read_matrix(doc.at("A"));
            if (doc.contains("B"))
                for (const auto& b : doc.at("B")) sys.B.push_back(read_matrix(b));
            std::string calc = doc.value("calculus", "ito");
            sys.calculus = calc == "stratonovich" ? LinearNoiseSystem::Calculus::Stratonovich
                                                  : LinearNoiseSystem::Calculus::Ito;
            sys.validate();
            fixed_system = std::move(sys);
            sigmas.push_back(Rat(0));  // single run; sigma column reports 0
        } else if (!sigma_flag.empty()) {
            sigmas.push_back(rat_from_string(sigma_flag));
        } else if (!sigma_range.empty()) {
            // A:B:STEP inclusive, stepped in exact rational arithmetic
            auto first = sigma_range.find(':');
            auto second = sigma_range.find(':', first + 1);
            if (first == std::string::npos || second == std::string::npos)
                throw SpecError("--sigma-range wants A:B:STEP");
            Rat a = rat_from_string(sigma_range.substr(0, first));
            Rat b = rat_from_string(sigma_range.substr(first + 1, second - first - 1));
            Rat step = rat_from_string(sigma_range.substr(second + 1));
            if (step <= 0) throw SpecError("--sigma-range step must be positive");
            for (Rat s = a; s <= b; s += step) sigmas.push_back(s);
        } else {
            throw SpecError("lyapunov needs --system, --sigma or --sigma-range");
        }
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    }

    std::vector<SweepPoint> points(sigmas.size());
    std::atomic<bool> failed{false};
    parallel_for(sigmas.size(), workers, [&](size_t i) {
        SweepPoint pt;
        pt.sigma = sigmas[i];
        pt.degree = degree;
        LinearNoiseSystem sys = fixed_system
                                    ? *fixed_system
                                    : noise_stabilization_system(rat_from_double(c1),
                                                                 rat_from_double(c2), sigmas[i]);
        try {
            pt.bounds = lyapunov_bounds(sys, degree);
            pt.verdict = classify(pt.bounds);
        } catch (const std::exception& e) {
            std::cerr << "solve failed at sigma=" << rat_to_string(pt.sigma) << ": " << e.what()
                      << "\n";
            failed = true;
        }
        if (pt.bounds.lower.status == SolveStatus::NumericalFailure ||
            pt.bounds.upper.status == SolveStatus::NumericalFailure)
            failed = true;
        points[i] = std::move(pt);
    });

    Report report;
    report.metadata.emplace_back("backend", kSolverBackend);
    report.columns = {"sigma",      "d",          "rho",     "eta",
                      "status_rho", "status_eta", "verdict", "solve_seconds"};
    for (const auto& pt : points) {
        ReportRecord rec;
        rec.add("sigma", to_double(pt.sigma), 10);
        rec.add("d", static_cast<long>(pt.degree));
        rec.add("rho", pt.bounds.rho());
        rec.add("eta", pt.bounds.eta());
        rec.add("status_rho", to_string(pt.bounds.lower.status));
        rec.add("status_eta", to_string(pt.bounds.upper.status));
        rec.add("verdict", to_string(pt.verdict.kind));
        rec.add("solve_seconds", pt.bounds.lower.seconds + pt.bounds.upper.seconds, 4);
        report.records.push_back(std::move(rec));
    }
    int rc = emit(report, opts);
    return failed ? kExitSolverError : rc;
}

int cmd_reliability(const std::string& multiples_flag, const std::string& u_flag, double horizon,
                    int degree, const OutputOptions& opts) {
    std::vector<double> thresholds;
    std::vector<double> multiples;
    try {
        if (horizon < 0) throw SpecError("horizon must be nonnegative");
        if (degree < 4) throw SpecError("reliability needs degree >= 4");
        double sigma_pi = oracle_duffing(1.0, horizon).sigma;
        if (!u_flag.empty()) {
            std::stringstream ss(u_flag);
            std::string item;
            while (std::getline(ss, item, ',')) {
                thresholds.push_back(std::stod(item));
                multiples.push_back(thresholds.back() / sigma_pi);
            }
        } else {
            std::string source = multiples_flag.empty() ? "3,4,5" : multiples_flag;
            std::stringstream ss(source);
            std::string item;
            while (std::getline(ss, item, ',')) {
                multiples.push_back(std::stod(item));
                thresholds.push_back(multiples.back() * sigma_pi);
            }
        }
        if (thresholds.empty()) throw SpecError("no thresholds given");
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const std::exception& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    }

    Report report;
    report.metadata.emplace_back("backend", kSolverBackend);
    report.columns = {"u",        "u_over_sigma", "degree",  "f_bound", "v_bound",  "p_bound",
                      "f_exact",  "v_exact",      "p_exact", "status_f", "status_v",
                      "solve_seconds"};
    bool failed = false;
    for (size_t i = 0; i < thresholds.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        ReliabilityResult res = reliability_bounds(thresholds[i], horizon, degree);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!res.occupation.upper.has_value() &&
            res.occupation.upper.status != SolveStatus::Unbounded)
            failed = true;
        if (!res.crossing.upper.has_value() && res.crossing.upper.status != SolveStatus::Unbounded)
            failed = true;
        ReportRecord rec;
        rec.add("u", res.threshold, 8);
        rec.add("u_over_sigma", multiples[i], 6);
        rec.add("degree", static_cast<long>(degree));
        rec.add("f_bound", res.occupation.eta(), 6);
        rec.add("v_bound", res.crossing.eta(), 6);
        rec.add("p_bound", res.p_u_bound, 6);
        rec.add("f_exact", res.exact.f_u, 6);
        rec.add("v_exact", res.exact.v_u, 6);
        rec.add("p_exact", res.exact.p_u, 6);
        rec.add("status_f", to_string(res.occupation.upper.status));
        rec.add("status_v", to_string(res.crossing.upper.status));
        rec.add("solve_seconds", secs, 4);
        report.records.push_back(std::move(rec));
    }
    int rc = emit(report, opts);
    return failed ? kExitSolverError : rc;
}

int cmd_posterior(long samples, std::uint64_t seed, int degree, const std::string& dump_data,
                  const OutputOptions& opts) {
    if (samples < 0) {
        std::cerr << "spec error: negative sample count\n";
        return kExitSpecError;
    }
    auto data = generate_recurrence({0.5, 2.0, 1.0}, 2.0, samples, seed);
    if (!dump_data.empty()) {
        std::ostringstream csv;
        csv << "k,z\n";
        csv.precision(17);
        for (size_t k = 0; k < data.z.size(); ++k) csv << (k + 1) << "," << data.z[k] << "\n";
        write_file_atomic(dump_data, csv.str());
        nlohmann::ordered_json meta;
        meta["seed"] = data.seed;
        meta["samples"] = data.z.size();
        meta["z0"] = data.z0;
        meta["params_true"] = data.params_true;
        meta["noise_grid"] = {{"lo", RecurrenceDataset::grid_lo},
                              {"hi", RecurrenceDataset::grid_hi},
                              {"step", RecurrenceDataset::grid_step}};
        write_file_atomic(dump_data + ".meta.json", meta.dump(2) + "\n");
    }

    auto noise_pot = parse_polynomial("3*x^2 - x^4", {"x"});
    auto prior_pot = parse_polynomial("-1/2*(p1^2 + p2^2 + p3^2)", {"p1", "p2", "p3"});
    Polynomial v = posterior_potential(data, noise_pot, prior_pot);

    PosteriorSummary summary;
    try {
        summary = posterior_bounds(v, degree);
    } catch (const std::invalid_argument& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    }

    bool failed = false;
    Report report;
    report.metadata.emplace_back("backend", kSolverBackend);
    report.metadata.emplace_back("samples", std::to_string(samples));
    report.metadata.emplace_back("seed", std::to_string(seed));
    report.columns = {"objective", "rho", "eta", "status_rho", "status_eta"};
    const char* names[] = {"p1", "p2", "p3"};
    for (int i = 0; i < 3; ++i) {
        const auto& mb = summary.mean_bounds[static_cast<size_t>(i)];
        if (!mb.lower.has_value() || !mb.upper.has_value()) failed = true;
        ReportRecord rec;
        rec.add("objective", std::string(names[i]));
        rec.add("rho", mb.rho());
        rec.add("eta", mb.eta());
        rec.add("status_rho", to_string(mb.lower.status));
        rec.add("status_eta", to_string(mb.upper.status));
        report.records.push_back(std::move(rec));
    }
    {
        ReportRecord rec;
        rec.add("objective", std::string("p1^2+p2^2+p3^2"));
        rec.add("rho", summary.second_moment.rho());
        rec.add("eta", summary.second_moment.eta());
        rec.add("status_rho", to_string(summary.second_moment.lower.status));
        rec.add("status_eta", to_string(summary.second_moment.upper.status));
        report.records.push_back(std::move(rec));
    }
    {
        ReportRecord rec;
        rec.add("objective", std::string("total_variance"));
        rec.add("rho", std::numeric_limits<double>::quiet_NaN());
        rec.add("eta", summary.total_variance_upper);
        rec.add("status_rho", std::string(""));
        rec.add("status_eta", std::string("upper_bound"));
        report.records.push_back(std::move(rec));
    }
    int rc = emit(report, opts);
    return failed ? kExitSolverError : rc;
}

int cmd_oracle(const std::string& name, const std::vector<std::string>& args,
               const OutputOptions& opts) {
    Report report;
    try {
        if (name == "circle_moment") {
            if (args.size() != 3) throw SpecError("usage: oracle circle_moment R A1 A2");
            Rat r = rat_from_string(args[0]);
            Rat m = oracle_circle_moment(r, std::stoi(args[1]), std::stoi(args[2]));
            report.columns = {"value", "value_double"};
            ReportRecord rec;
            rec.add("value", rat_to_string(m));
            rec.add("value_double", to_double(m), 15);
            report.records.push_back(std::move(rec));
        } else if (name == "inverse_gamma") {
            if (args.size() != 2) throw SpecError("usage: oracle inverse_gamma LAMBDA K");
            Rat m = oracle_inverse_gamma_moment(std::stol(args[0]), std::stol(args[1]));
            report.columns = {"value", "value_double"};
            ReportRecord rec;
            rec.add("value", rat_to_string(m));
            rec.add("value_double", to_double(m), 15);
            report.records.push_back(std::move(rec));
        } else if (name == "lyapunov") {
            if (args.size() < 3) throw SpecError("usage: oracle lyapunov C1 C2 SIGMA [GRID]");
            long grid = args.size() > 3 ? std::stol(args[3]) : 4096;
            double v =
                oracle_lyapunov(std::stod(args[0]), std::stod(args[1]), std::stod(args[2]), grid);
            report.columns = {"value"};
            ReportRecord rec;
            rec.add("value", v, 12);
            report.records.push_back(std::move(rec));
        } else if (name == "duffing") {
            if (args.size() != 2) throw SpecError("usage: oracle duffing U HORIZON");
            DuffingExact d = oracle_duffing(std::stod(args[0]), std::stod(args[1]));
            report.columns = {"f_u", "v_u", "p_u", "sigma_pi"};
            ReportRecord rec;
            rec.add("f_u", d.f_u, 12);
            rec.add("v_u", d.v_u, 12);
            rec.add("p_u", d.p_u, 12);
            rec.add("sigma_pi", d.sigma, 12);
            report.records.push_back(std::move(rec));
        } else {
            throw SpecError("unknown oracle '" + name +
                            "' (circle_moment, inverse_gamma, lyapunov, duffing)");
        }
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const std::exception& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    }
    return emit(report, opts);
}

int cmd_simulate(const std::string& spec_path, const std::string& objective_flag, double horizon,
                 double dt, std::uint64_t seed, double burn_in, const OutputOptions& opts) {
    try {
        ProblemSpec spec = load_problem_spec(spec_path);
        SdeModel model = spec.model();
        Polynomial f;
        if (!objective_flag.empty()) {
            f = parse_polynomial(objective_flag, spec.variables);
        } else if (spec.objective) {
            f = *spec.objective;
        } else {
            throw SpecError("simulate needs --objective or an objective in the spec file");
        }
        TimeAverage avg = simulate_time_average(model, f, horizon, dt, seed, burn_in);
        Report report;
        report.columns = {"mean", "standard_error", "batches", "diverged", "divergence_time"};
        ReportRecord rec;
        rec.add("mean", avg.mean, 12);
        rec.add("standard_error", avg.standard_error, 6);
        rec.add("batches", avg.batches);
        rec.add("diverged", std::string(avg.diverged ? "true" : "false"));
        rec.add("divergence_time",
                avg.diverged ? avg.divergence_time : std::numeric_limits<double>::quiet_NaN());
        report.records.push_back(std::move(rec));
        return emit(report, opts);
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const ParseError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    }
}

int cmd_export(const std::string& spec_path, int degree_flag, const OutputOptions& opts) {
    try {
        ProblemSpec spec = load_problem_spec(spec_path);
        int degree = degree_flag > 0 ? degree_flag : spec.degree.value_or(0);
        if (degree <= 0) throw SpecError("export needs a degree");
        MomentProblem prob = assemble_from_spec(spec, degree);
        ConicProblem cp = ConicProblem::from_moment_problem(prob);
        std::string text = export_canonical(cp);
        if (opts.out_path.empty()) {
            std::cout << text << "\n";
        } else {
            write_file_atomic(opts.out_path, text);
        }
        std::cerr << "fingerprint: " << fingerprint(text) << "\n";
        return kExitOk;
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified bounds on stationary averages of polynomial diffusions"};
    app.require_subcommand(1);

    unsigned default_workers = std::max(1u, std::thread::hardware_concurrency());

    std::string bound_spec;
    int bound_degree = 0;
    std::string bound_range, bound_scale;
    double bound_tol = 0;
    unsigned bound_workers = default_workers;
    OutputOptions bound_out;
    auto* bound = app.add_subcommand("bound", "Lower and upper bounds on a stationary average");
    bound->add_option("spec", bound_spec, "Problem spec file (specfile-v1)")->required();
    bound->add_option("-d,--degree", bound_degree, "Relaxation degree");
    bound->add_option("--degree-range", bound_range, "Degree range LO:HI");
    bound->add_option("--tolerance", bound_tol, "Solver tolerance");
    bound->add_option("--scale", bound_scale, "Rescaling vector z1,z2,...");
    bound->add_option("--workers", bound_workers, "Worker threads for degree sweeps");
    add_output_flags(bound, bound_out);

    std::string lyap_system, lyap_sigma, lyap_range;
    double lyap_c1 = 1.0, lyap_c2 = -30.0;
    int lyap_degree = 16;
    unsigned lyap_workers = default_workers;
    OutputOptions lyap_out;
    auto* lyap = app.add_subcommand("lyapunov", "Lyapunov exponent bounds and stability verdicts");
    lyap->add_option("--system", lyap_system, "Linear system file (JSON: n, A, B, calculus)");
    lyap->add_option("--c1", lyap_c1, "Benchmark growth rate c1");
    lyap->add_option("--c2", lyap_c2, "Benchmark growth rate c2");
    lyap->add_option("--sigma", lyap_sigma, "Single noise strength");
    lyap->add_option("--sigma-range", lyap_range, "Sweep A:B:STEP");
    lyap->add_option("-d,--degree", lyap_degree, "Relaxation degree");
    lyap->add_option("--workers", lyap_workers, "Worker threads for sweeps");
    add_output_flags(lyap, lyap_out);

    std::string rel_multiples, rel_u;
    double rel_horizon = 100.0;
    int rel_degree = 14;
    OutputOptions rel_out;
    auto* rel = app.add_subcommand("reliability", "Oscillator exceedance and up-crossing bounds");
    rel->add_option("--multiples", rel_multiples,
                    "Thresholds as multiples of sigma_pi (default 3,4,5)");
    rel->add_option("--u", rel_u, "Absolute thresholds u1,u2,...");
    rel->add_option("--horizon", rel_horizon, "Time horizon T");
    rel->add_option("-d,--degree", rel_degree, "Relaxation degree");
    add_output_flags(rel, rel_out);

    long post_samples = 50;
    std::uint64_t post_seed = 7;
    int post_degree = 5;
    std::string post_dump;
    OutputOptions post_out;
    auto* post =
        app.add_subcommand("posterior", "Posterior mean bounds for the benchmark recurrence");
    post->add_option("--samples", post_samples, "Number of observations");
    post->add_option("--seed", post_seed, "Dataset seed");
    post->add_option("-d,--degree", post_degree, "Relaxation degree");
    post->add_option("--dump-data", post_dump, "Write the dataset CSV (+ .meta.json sidecar)");
    add_output_flags(post, post_out);

    std::string oracle_name;
    std::vector<std::string> oracle_args;
    OutputOptions oracle_out;
    auto* oracle = app.add_subcommand("oracle", "Closed-form reference values");
    oracle->add_option("name", oracle_name, "circle_moment | inverse_gamma | lyapunov | duffing")
        ->required();
    oracle->add_option("args", oracle_args, "Oracle arguments");
    add_output_flags(oracle, oracle_out);

    std::string sim_spec, sim_objective;
    double sim_horizon = 1e4, sim_dt = 1e-4, sim_burn = 10.0;
    std::uint64_t sim_seed = 1;
    OutputOptions sim_out;
    auto* sim = app.add_subcommand("simulate", "Euler-Maruyama long-run time average");
    sim->add_option("spec", sim_spec, "Problem spec file")->required();
    sim->add_option("--objective", sim_objective,
                    "Polynomial to average (defaults to the spec objective)");
    sim->add_option("--horizon", sim_horizon, "Path horizon T");
    sim->add_option("--dt", sim_dt, "Step size");
    sim->add_option("--seed", sim_seed, "Path seed");
    sim->add_option("--burn-in", sim_burn, "Burn-in time");
    add_output_flags(sim, sim_out);

    std::string export_spec;
    int export_degree = 0;
    OutputOptions export_out;
    auto* exp = app.add_subcommand("export", "Emit the canonical momsdp-v1 document");
    exp->add_option("spec", export_spec, "Problem spec file")->required();
    exp->add_option("-d,--degree", export_degree, "Relaxation degree");
    exp->add_option("--out", export_out.out_path, "Write to FILE (atomic)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bound->parsed())
            return cmd_bound(bound_spec, bound_degree, bound_range, bound_tol, bound_scale,
                             bound_workers, bound_out);
        if (lyap->parsed())
            return cmd_lyapunov(lyap_system, lyap_c1, lyap_c2, lyap_sigma, lyap_range, lyap_degree,
                                lyap_workers, lyap_out);
        if (rel->parsed())
            return cmd_reliability(rel_multiples, rel_u, rel_horizon, rel_degree, rel_out);
        if (post->parsed())
            return cmd_posterior(post_samples, post_seed, post_degree, post_dump, post_out);
        if (oracle->parsed()) return cmd_oracle(oracle_name, oracle_args, oracle_out);
        if (sim->parsed())
            return cmd_simulate(sim_spec, sim_objective, sim_horizon, sim_dt, sim_seed, sim_burn,
                                sim_out);
        if (exp->parsed()) return cmd_export(export_spec, export_degree, export_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolverError;
    }
    return kExitOk;
}
