// copsched — command-line front end: every operation behind one binary with
// reproducible seeds and machine-readable (json/csv) output.
#include <clocale>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "copsched/bounds.hpp"
#include "copsched/io.hpp"
#include "copsched/mechanism.hpp"
#include "copsched/optimizer.hpp"
#include "copsched/rng.hpp"

namespace {

using namespace copsched;

struct CommonOpts {
    std::string marginal = "piecewise";
    double a = 1.715;
    double b = 0.76;
    std::string marginal_file;
    std::string copula = "independent";
    long long n = 2;
    std::uint64_t seed = 42;
    int runs = 10;
    int threads = 0;
    std::string format = "json";
    std::string out;
};

void add_marginal_opts(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--marginal", o.marginal,
                    "marginal family: piecewise (alias: paper), transcendental, "
                    "tabulated (needs --marginal-file)")
        ->capture_default_str();
    sub->add_option("--a", o.a, "piecewise marginal support parameter a in (1,3]")
        ->capture_default_str();
    sub->add_option("--b", o.b, "piecewise marginal midpoint value b in (0.5,1)")
        ->capture_default_str();
    sub->add_option("--marginal-file", o.marginal_file,
                    "JSON marginal description (overrides --marginal/--a/--b)");
}

void add_copula_opts(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--copula", o.copula, "joint law: independent or clayton")
        ->check(CLI::IsMember({"independent", "clayton"}))
        ->capture_default_str();
    sub->add_option("--n", o.n, "coordinate count (clayton needs n >= 2)")
        ->capture_default_str();
}

void add_output_opts(CLI::App* sub, CommonOpts& o, bool with_format = true) {
    if (with_format)
        sub->add_option("--format", o.format, "output encoding")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
    sub->add_option("--out", o.out, "write the report here instead of stdout");
    sub->add_option("--threads", o.threads, "cap OpenMP worker count (0 = default)")
        ->capture_default_str();
}

void add_seed_opts(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--seed", o.seed, "random stream seed")->capture_default_str();
    sub->add_option("--runs", o.runs, "independent search repetitions")
        ->capture_default_str();
}

Marginal build_marginal(const CommonOpts& o) {
    if (!o.marginal_file.empty()) return load_marginal_json(o.marginal_file);
    if (o.marginal == "piecewise" || o.marginal == "paper")
        return make_piecewise(o.a, o.b);
    if (o.marginal == "transcendental") return make_transcendental();
    if (o.marginal == "tabulated")
        throw std::runtime_error("tabulated marginal needs --marginal-file");
    throw std::runtime_error("unknown marginal '" + o.marginal + "'");
}

Copula build_copula(const CommonOpts& o) {
    Marginal m = build_marginal(o);
    if (o.copula == "clayton") return make_clayton(o.n, std::move(m));
    return make_independent(std::max<long long>(1, o.n), std::move(m));
}

void apply_threads(const CommonOpts& o) {
#ifdef _OPENMP
    if (o.threads > 0) omp_set_num_threads(o.threads);
#else
    (void)o;
#endif
}

void emit(const CommonOpts& o, const std::string& payload) {
    if (o.out.empty())
        std::fputs(payload.c_str(), stdout);
    else
        write_text_file(o.out, payload);
}

// JSON number token; non-finite doubles are quoted ("inf", "-inf", "nan").
std::string jnum(double v) {
    if (std::isfinite(v)) return fmt17(v);
    return "\"" + fmt17(v) + "\"";
}

std::string jbool(bool v) { return v ? "true" : "false"; }

// ---- subcommand payloads --------------------------------------------------

std::string payload_phi_eval(const Copula& c, double x, double y) {
    const PhiParts p = eval_phi_parts(c, x, y);
    std::string s = "{\n";
    s += "  \"x\": " + jnum(x) + ",\n";
    s += "  \"y\": " + jnum(y) + ",\n";
    s += "  \"phi\": " + jnum(p.value) + ",\n";
    s += "  \"h\": " + jnum(p.h) + ",\n";
    s += std::string("  \"regime\": \"") +
         (c.regime == Regime::Clayton ? "clayton" : "independent") + "\",\n";
    s += std::string("  \"branch\": \"") + (p.coef1_unit ? "xy>=1" : "xy<=1") +
         "\",\n";
    s += "  \"coef1_unit\": " + jbool(p.coef1_unit) + ",\n";
    s += "  \"coef2_recip\": " + jbool(p.coef2_recip) + "\n";
    s += "}\n";
    return s;
}

std::string payload_maximize(const CommonOpts& o, const RatioReport& rep) {
    if (o.format == "csv") {
        std::string s =
            "record,x_lo,x_hi,y_lo,y_hi,x,y,value,delta,runs,"
            "constraint_side,copula_side,converged\n";
        s += "global,,,,," + fmt17(rep.argmax_x) + "," + fmt17(rep.argmax_y) + "," +
             fmt17(rep.max_value) + "," + fmt17(rep.spread_delta) + "," +
             std::to_string(rep.runs) + ",,,\n";
        for (const CellResult& cr : rep.per_cell) {
            s += "cell," + fmt17(cr.cell.x_lo) + "," + fmt17(cr.cell.x_hi) + "," +
                 fmt17(cr.cell.y_lo) + "," + fmt17(cr.cell.y_hi) + "," +
                 fmt17(cr.x) + "," + fmt17(cr.y) + "," + fmt17(cr.value) + ",,," +
                 std::to_string(cr.cell.constraint_side) + "," +
                 std::to_string(cr.cell.copula_side) + "," + jbool(cr.converged) +
                 "\n";
        }
        return s;
    }
    std::string s = "{\n";
    s += "  \"argmax\": [" + jnum(rep.argmax_x) + ", " + jnum(rep.argmax_y) + "],\n";
    s += "  \"value\": " + jnum(rep.max_value) + ",\n";
    s += "  \"delta\": " + jnum(rep.spread_delta) + ",\n";
    s += "  \"runs\": " + std::to_string(rep.runs) + ",\n";
    s += "  \"cells\": [\n";
    for (std::size_t i = 0; i < rep.per_cell.size(); ++i) {
        const CellResult& cr = rep.per_cell[i];
        s += "    {\"x_range\": [" + jnum(cr.cell.x_lo) + ", " + jnum(cr.cell.x_hi) +
             "], \"y_range\": [" + jnum(cr.cell.y_lo) + ", " + jnum(cr.cell.y_hi) +
             "], \"constraint_side\": " + std::to_string(cr.cell.constraint_side) +
             ", \"copula_side\": " + std::to_string(cr.cell.copula_side) +
             ", \"argmax\": [" + jnum(cr.x) + ", " + jnum(cr.y) + "]" +
             ", \"value\": " + jnum(cr.value) +
             ", \"converged\": " + jbool(cr.converged) + "}";
        s += i + 1 < rep.per_cell.size() ? ",\n" : "\n";
    }
    s += "  ]\n}\n";
    return s;
}

std::string payload_tune(const CommonOpts& o, long long n, const TuneResult& t) {
    const RatioReport& rep = t.report;
    if (o.format == "csv") {
        std::string s = "n,a,b,x,y,value,delta,runs\n";
        s += std::to_string(n) + "," + fmt17(t.a) + "," + fmt17(t.b) + "," +
             fmt17(rep.argmax_x) + "," + fmt17(rep.argmax_y) + "," +
             fmt17(rep.max_value) + "," + fmt17(rep.spread_delta) + "," +
             std::to_string(rep.runs) + "\n";
        return s;
    }
    std::string s = "{\n";
    s += "  \"n\": " + std::to_string(n) + ",\n";
    s += "  \"a\": " + jnum(t.a) + ",\n";
    s += "  \"b\": " + jnum(t.b) + ",\n";
    s += "  \"argmax\": [" + jnum(rep.argmax_x) + ", " + jnum(rep.argmax_y) + "],\n";
    s += "  \"value\": " + jnum(rep.max_value) + ",\n";
    s += "  \"delta\": " + jnum(rep.spread_delta) + ",\n";
    s += "  \"runs\": " + std::to_string(rep.runs) + "\n";
    s += "}\n";
    return s;
}

std::string payload_curve(const std::vector<CurveRow>& rows) {
    std::string s = "n,a,b,x_star,y_star,value,delta\n";
    for (const CurveRow& r : rows) {
        s += std::to_string(r.n) + "," + fmt17(r.a) + "," + fmt17(r.b) + "," +
             fmt17(r.x_star) + "," + fmt17(r.y_star) + "," + fmt17(r.value) + "," +
             fmt17(r.delta) + "\n";
    }
    return s;
}

std::string payload_simulate(const CommonOpts& o, const RatioEstimate& est) {
    if (o.format == "csv") {
        return "mean_ratio,std_err,samples,seed\n" + fmt17(est.mean_ratio) + "," +
               fmt17(est.std_err) + "," + std::to_string(est.samples) + "," +
               std::to_string(o.seed) + "\n";
    }
    std::string s = "{\n";
    s += "  \"mean_ratio\": " + jnum(est.mean_ratio) + ",\n";
    s += "  \"std_err\": " + jnum(est.std_err) + ",\n";
    s += "  \"samples\": " + std::to_string(est.samples) + ",\n";
    s += "  \"seed\": " + std::to_string(o.seed) + "\n";
    s += "}\n";
    return s;
}

std::string payload_mono(const CommonOpts& o, const MonotonicityReport& rep,
                         double tolerance, bool pass) {
    if (o.format == "csv") {
        return "max_violation,cases,tolerance,pass\n" + fmt17(rep.max_violation) +
               "," + std::to_string(rep.cases) + "," + fmt17(tolerance) + "," +
               jbool(pass) + "\n";
    }
    std::string s = "{\n";
    s += "  \"max_violation\": " + jnum(rep.max_violation) + ",\n";
    s += "  \"cases\": " + std::to_string(rep.cases) + ",\n";
    s += "  \"tolerance\": " + jnum(tolerance) + ",\n";
    s += "  \"pass\": " + jbool(pass) + "\n";
    s += "}\n";
    return s;
}

std::string payload_counterexample(const CommonOpts& o, double a1, double a2,
                                   double theta, double bound, bool exceeds) {
    if (o.format == "csv") {
        return "alpha1,alpha2,theta,claimed_bound,exceeds\n" + fmt17(a1) + "," +
               fmt17(a2) + "," + fmt17(theta) + "," + fmt17(bound) + "," +
               jbool(exceeds) + "\n";
    }
    std::string s = "{\n";
    s += "  \"alpha1\": " + jnum(a1) + ",\n";
    s += "  \"alpha2\": " + jnum(a2) + ",\n";
    s += "  \"theta\": " + jnum(theta) + ",\n";
    s += "  \"claimed_bound\": " + jnum(bound) + ",\n";
    s += "  \"exceeds\": " + jbool(exceeds) + "\n";
    s += "}\n";
    return s;
}

std::string payload_verify_lb(const CommonOpts& o, const LowerBoundReport& rep) {
    if (o.format == "csv") {
        std::string s =
            "resolution,threshold,minimax,slack,refined_minimax,tuples_checked,pass,"
            "f1,f2,f3,f4,f5,rf1,rf2,rf3,rf4,rf5\n";
        s += fmt17(rep.resolution) + "," + fmt17(rep.threshold) + "," +
             fmt17(rep.minimax) + "," + fmt17(rep.slack) + "," +
             fmt17(rep.refined_minimax) + "," + fmt17(rep.tuples_checked) + "," +
             jbool(rep.pass);
        for (double v : rep.argmin_tuple) s += "," + fmt17(v);
        for (double v : rep.refined_tuple) s += "," + fmt17(v);
        s += "\n";
        return s;
    }
    auto tuple_json = [](const std::array<double, 5>& t) {
        std::string s = "[";
        for (int i = 0; i < 5; ++i) s += (i ? ", " : "") + jnum(t[i]);
        return s + "]";
    };
    std::string s = "{\n";
    s += "  \"resolution\": " + jnum(rep.resolution) + ",\n";
    s += "  \"threshold\": " + jnum(rep.threshold) + ",\n";
    s += "  \"minimax\": " + jnum(rep.minimax) + ",\n";
    s += "  \"argmin_tuple\": " + tuple_json(rep.argmin_tuple) + ",\n";
    s += "  \"slack\": " + jnum(rep.slack) + ",\n";
    s += "  \"refined_minimax\": " + jnum(rep.refined_minimax) + ",\n";
    s += "  \"refined_tuple\": " + tuple_json(rep.refined_tuple) + ",\n";
    s += "  \"tuples_checked\": " + jnum(rep.tuples_checked) + ",\n";
    s += "  \"pass\": " + jbool(rep.pass) + "\n";
    s += "}\n";
    return s;
}

std::string payload_sample(const CommonOpts& o, const SampleBatch& batch) {
    if (o.format == "csv") {
        std::string s;
        for (std::size_t r = 0; r < batch.count; ++r) {
            for (std::size_t j = 0; j < batch.n; ++j) {
                if (j) s += ',';
                s += fmt17(batch.at(r, j));
            }
            s += '\n';
        }
        return s;
    }
    std::string s = "{\n";
    s += "  \"seed\": " + std::to_string(batch.seed) + ",\n";
    s += "  \"count\": " + std::to_string(batch.count) + ",\n";
    s += "  \"n\": " + std::to_string(batch.n) + ",\n";
    s += "  \"draws\": [\n";
    for (std::size_t r = 0; r < batch.count; ++r) {
        s += "    [";
        for (std::size_t j = 0; j < batch.n; ++j) {
            if (j) s += ", ";
            s += jnum(batch.at(r, j));
        }
        s += r + 1 < batch.count ? "],\n" : "]\n";
    }
    s += "  ]\n}\n";
    return s;
}

Instance parse_matrix(const std::string& text) {
    // "t11,t12,...;t21,t22,..."
    const std::size_t semi = text.find(';');
    if (semi == std::string::npos)
        throw std::runtime_error("--matrix wants 'row1;row2' with comma-separated times");
    Instance inst;
    for (int row = 0; row < 2; ++row) {
        const std::string part =
            row == 0 ? text.substr(0, semi) : text.substr(semi + 1);
        std::vector<double>& dst = row == 0 ? inst.t1 : inst.t2;
        std::size_t pos = 0;
        while (pos <= part.size()) {
            std::size_t comma = part.find(',', pos);
            if (comma == std::string::npos) comma = part.size();
            dst.push_back(std::stod(part.substr(pos, comma - pos)));
            if (comma == part.size()) break;
            pos = comma + 1;
        }
    }
    validate_instance(inst);
    return inst;
}

Instance random_instance(std::uint64_t seed, std::uint64_t idx, int tasks) {
    Rng g = substream(seed, idx, 0xfaceULL);
    Instance inst;
    inst.t1.resize(tasks);
    inst.t2.resize(tasks);
    for (int j = 0; j < tasks; ++j) {
        inst.t1[j] = g.u01() < 0.15 ? 0.0 : 3.0 * g.u01();
        inst.t2[j] = g.u01() < 0.15 ? 0.0 : 3.0 * g.u01();
    }
    return inst;
}

const std::vector<long long> kDefaultCurve = {
    2,  3,  4,  5,   6,   7,   8,    9,    10,     15,     20,
    30, 45, 70, 100, 200, 500, 1000, 5000, 10000, 100000, 1000000};

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_NUMERIC, "C");
    CLI::App app{"copula-coupled randomized scheduling mechanism toolkit"};
    app.require_subcommand(1);

    // ---- phi-eval ----
    CommonOpts phi_o;
    double phi_x = 1.0, phi_y = 1.0;
    CLI::App* phi = app.add_subcommand("phi-eval", "evaluate the worst-case surface at one point");
    phi->add_option("--x", phi_x, "x coordinate (> 0, inf allowed)")->required();
    phi->add_option("--y", phi_y, "y coordinate (>= 0, inf allowed)")->required();
    add_marginal_opts(phi, phi_o);
    add_copula_opts(phi, phi_o);
    add_output_opts(phi, phi_o, /*with_format=*/false);

    // ---- maximize ----
    CommonOpts max_o;
    CLI::App* maxc = app.add_subcommand("maximize", "global maximum of the worst-case surface");
    add_marginal_opts(maxc, max_o);
    add_copula_opts(maxc, max_o);
    add_seed_opts(maxc, max_o);
    add_output_opts(maxc, max_o);

    // ---- tune-ab ----
    CommonOpts tune_o;
    double a_min = 1.65, a_max = 2.4, b_min = 0.72, b_max = 0.8;
    int a_steps = 5, b_steps = 5;
    CLI::App* tune = app.add_subcommand("tune-ab", "search marginal parameters minimizing the maximum");
    add_copula_opts(tune, tune_o);
    tune->add_option("--a-min", a_min)->capture_default_str();
    tune->add_option("--a-max", a_max)->capture_default_str();
    tune->add_option("--a-steps", a_steps)->capture_default_str();
    tune->add_option("--b-min", b_min)->capture_default_str();
    tune->add_option("--b-max", b_max)->capture_default_str();
    tune->add_option("--b-steps", b_steps)->capture_default_str();
    add_seed_opts(tune, tune_o);
    add_output_opts(tune, tune_o);

    // ---- curve ----
    CommonOpts curve_o;
    std::vector<long long> n_list = kDefaultCurve;
    CLI::App* curve = app.add_subcommand("curve", "ratio-vs-n data series (CSV)");
    curve->add_option("--n-list", n_list, "task counts (each >= 2)")
        ->delimiter(',');
    add_seed_opts(curve, curve_o);
    add_output_opts(curve, curve_o, /*with_format=*/false);

    // ---- simulate ----
    CommonOpts sim_o;
    std::string sim_file, sim_matrix;
    long long sim_samples = 100000;
    CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo mechanism-vs-optimum ratio");
    sim->add_option("--file", sim_file, "instance file (.csv: 2 rows; .json: {\"t\": [[..],[..]]})");
    sim->add_option("--matrix", sim_matrix, "inline instance 'row1;row2'");
    sim->add_option("--samples", sim_samples)->capture_default_str();
    add_marginal_opts(sim, sim_o);
    add_copula_opts(sim, sim_o);
    add_seed_opts(sim, sim_o);
    add_output_opts(sim, sim_o);

    // ---- check-mono ----
    CommonOpts mono_o;
    std::string mono_file;
    int mono_instances = 100, mono_pert = 100, mono_tasks = 4;
    CLI::App* mono = app.add_subcommand("check-mono", "probability-level allocation monotonicity check");
    mono->add_option("--file", mono_file, "check this instance instead of random ones");
    mono->add_option("--instances", mono_instances)->capture_default_str();
    mono->add_option("--perturbations", mono_pert)->capture_default_str();
    mono->add_option("--tasks", mono_tasks, "task count of random instances")
        ->capture_default_str();
    add_marginal_opts(mono, mono_o);
    add_copula_opts(mono, mono_o);
    add_seed_opts(mono, mono_o);
    add_output_opts(mono, mono_o);

    // ---- counterexample ----
    CommonOpts ce_o;
    double ce_a1 = 0.87793459260323, ce_a2 = 2.09409917605545, ce_bound = 1.5963;
    CLI::App* ce = app.add_subcommand(
        "counterexample", "two-task instance value refuting the claimed 1.5963 bound");
    ce->add_option("--alpha1", ce_a1)->capture_default_str();
    ce->add_option("--alpha2", ce_a2)->capture_default_str();
    ce->add_option("--claimed-bound", ce_bound)->capture_default_str();
    add_output_opts(ce, ce_o);

    // ---- verify-lb ----
    CommonOpts lb_o;
    double lb_res = 1e-3, lb_threshold = 1.5852;
    CLI::App* lb = app.add_subcommand("verify-lb", "grid certificate for the 1.5852 lower bound");
    lb->add_option("--resolution", lb_res)->capture_default_str();
    lb->add_option("--threshold", lb_threshold)->capture_default_str();
    add_output_opts(lb, lb_o);

    // ---- sample ----
    CommonOpts sam_o;
    long long sam_count = 5;
    CLI::App* sam = app.add_subcommand("sample", "draw joint threshold vectors");
    sam->add_option("--count", sam_count)->capture_default_str();
    add_marginal_opts(sam, sam_o);
    add_copula_opts(sam, sam_o);
    add_seed_opts(sam, sam_o);
    add_output_opts(sam, sam_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exits 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }

    try {
        if (phi->parsed()) {
            apply_threads(phi_o);
            emit(phi_o, payload_phi_eval(build_copula(phi_o), phi_x, phi_y));
            return 0;
        }
        if (maxc->parsed()) {
            apply_threads(max_o);
            const RatioReport rep =
                maximize_phi(build_copula(max_o), max_o.runs, max_o.seed);
            emit(max_o, payload_maximize(max_o, rep));
            return 0;
        }
        if (tune->parsed()) {
            apply_threads(tune_o);
            const long long n = tune_o.copula == "clayton" ? tune_o.n : 1;
            const TuneResult t =
                tune_ab(n, GridRange{a_min, a_max, a_steps},
                        GridRange{b_min, b_max, b_steps}, tune_o.runs, tune_o.seed);
            emit(tune_o, payload_tune(tune_o, n, t));
            return 0;
        }
        if (curve->parsed()) {
            apply_threads(curve_o);
            emit(curve_o, payload_curve(ratio_curve(n_list, curve_o.runs, curve_o.seed)));
            return 0;
        }
        if (sim->parsed()) {
            apply_threads(sim_o);
            if (sim_file.empty() && sim_matrix.empty())
                throw std::runtime_error("simulate needs --file or --matrix");
            const Instance inst =
                sim_matrix.empty() ? load_instance(sim_file) : parse_matrix(sim_matrix);
            sim_o.n = static_cast<long long>(inst.num_tasks());
            const Copula c = build_copula(sim_o);
            const RatioEstimate est = estimate_ratio(inst, c, sim_samples, sim_o.seed);
            emit(sim_o, payload_simulate(sim_o, est));
            return 0;
        }
        if (mono->parsed()) {
            apply_threads(mono_o);
            MonotonicityReport total;
            if (!mono_file.empty()) {
                const Instance inst = load_instance(mono_file);
                mono_o.n = static_cast<long long>(inst.num_tasks());
                total = check_monotonicity(inst, build_copula(mono_o), mono_pert,
                                           mono_o.seed);
            } else {
                mono_o.n = mono_tasks;
                const Copula c = build_copula(mono_o);
                for (int i = 0; i < mono_instances; ++i) {
                    const Instance inst =
                        random_instance(mono_o.seed, static_cast<std::uint64_t>(i),
                                        mono_tasks);
                    const MonotonicityReport rep = check_monotonicity(
                        inst, c, mono_pert,
                        substream(mono_o.seed, static_cast<std::uint64_t>(i), 0x3eULL)
                            .next());
                    total.max_violation = std::max(total.max_violation, rep.max_violation);
                    total.cases += rep.cases;
                }
            }
            const double tol = 1e-12;
            emit(mono_o, payload_mono(mono_o, total, tol, total.max_violation <= tol));
            return 0;
        }
        if (ce->parsed()) {
            const double theta = eval_theta(ce_a1, ce_a2);
            const bool exceeds = theta > ce_bound;
            emit(ce_o, payload_counterexample(ce_o, ce_a1, ce_a2, theta, ce_bound,
                                              exceeds));
            return exceeds ? 0 : 2;
        }
        if (lb->parsed()) {
            apply_threads(lb_o);
            const LowerBoundReport rep = verify_lower_bound(lb_res, lb_threshold);
            emit(lb_o, payload_verify_lb(lb_o, rep));
            return rep.pass ? 0 : 2;
        }
        if (sam->parsed()) {
            apply_threads(sam_o);
            const SampleBatch batch = sample(
                build_copula(sam_o), static_cast<std::size_t>(sam_count), sam_o.seed);
            emit(sam_o, payload_sample(sam_o, batch));
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
