// qmarg: command-line front end for the projected orbital density library.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <qmarg/io.hpp>
#include <qmarg/qmarg.hpp>

namespace fs = std::filesystem;
using namespace qmarg;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kValidation = 2, kNumerical = 3, kCap = 4 };

struct Options {
    std::string setting;
    std::string lambda, lambda_file;
    long long samples = 100000;
    std::uint64_t seed = 1;
    int grid = 50;
    double cutoff = 0;
    int nodes = 0;
    std::string evaluator = "quad";
    int workers = 1;
    std::string out;
    std::string format = "csv";
    std::string point, a, b, mu;
    long long mc = 0;
    int torus_grid = 0;
    int refine = 1;
    double smoothing = 2;
    double tolerance = 0.05;
    bool raw = false;
    bool error_estimate = false;
};

struct Flags {
    CLI::Option* seed = nullptr;
};

Vec read_lambda(Options const& o) {
    if (!o.lambda.empty() && !o.lambda_file.empty()) throw ValidationError("give --lambda or --lambda-file, not both");
    if (!o.lambda_file.empty()) return read_lambda_file(o.lambda_file);
    if (o.lambda.empty()) throw ValidationError("--lambda or --lambda-file is required");
    return parse_vector(o.lambda);
}

Weight integer_weight(Vec const& v) {
    Weight w(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] != std::round(v[i]) || std::abs(v[i]) > 1e15) throw ValidationError("highest weight entries must be integers");
        w[i] = static_cast<long long>(v[i]);
    }
    return w;
}

std::vector<double> to_std(Vec const& v) { return {v.data(), v.data() + v.size()}; }

QuadratureParams quad_params(Options const& o) {
    QuadratureParams q;
    q.cutoff = o.cutoff;
    q.nodes_per_axis = o.nodes;
    return q;
}

Evaluator parse_evaluator(std::string const& s) {
    if (s == "quad") return Evaluator::Quad;
    if (s == "exact") return Evaluator::Exact;
    throw ValidationError("--evaluator must be quad or exact");
}

//! Seed precedence: --seed, then QMARG_SEED, then the default.
void resolve_seed(Options& o, Flags const& f, RunRecord& rec) {
    rec.seed_source = "default";
    if (f.seed && f.seed->count()) {
        rec.seed_source = "flag";
    } else if (char const* env = std::getenv("QMARG_SEED")) {
        std::string s(env);
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (std::exception const&) {
            pos = 0;
        }
        if (s.empty() || pos != s.size() || s[0] == '-') throw ValidationError("QMARG_SEED is not a nonnegative integer: '" + s + "'");
        o.seed = v;
        rec.seed_source = "env";
    }
    rec.seed = o.seed;
}

//! Payload sink: files under --out, otherwise stdout.
class Output {
  public:
    Output(Options const& o, RunRecord& rec) : o_(o), rec_(rec) {
        if (o_.format != "csv" && o_.format != "json") throw ValidationError("--format must be csv or json");
        if (!o_.out.empty()) {
            std::error_code ec;
            fs::create_directories(o_.out, ec);
            if (ec) throw ValidationError("cannot create " + o_.out + ": " + ec.message());
        }
    }

    bool csv() const { return o_.format == "csv"; }

    //! The primary artifact in the selected format.
    void emit(std::string const& stem, std::string const& csv_text, json j) {
        if (csv())
            put(stem + ".csv", csv_text);
        else
            put(stem + ".json", dump(std::move(j)));
    }

    //! A JSON artifact; echo prints it to stdout even when writing files.
    void emit_json(std::string const& name, json j, bool echo = false) {
        std::string text = dump(std::move(j));
        if (echo && !o_.out.empty()) std::cout << text;
        put(name, text, o_.out.empty() ? echo : false);
    }

  private:
    std::string dump(json j) const {
        json out = {{"run", rec_.id}};
        for (auto& [k, v] : j.items()) out[k] = v;
        return out.dump(2) + "\n";
    }

    void put(std::string const& name, std::string const& text, bool to_stdout = true) {
        if (o_.out.empty()) {
            if (to_stdout) std::cout << text;
            return;
        }
        write_file(fs::path(o_.out) / name, text);
        rec_.artifacts.push_back(name);
    }

    Options const& o_;
    RunRecord& rec_;
};

std::string csv_header(std::string const& run, std::string const& prefix, int n, std::vector<std::string> const& tail) {
    std::ostringstream os;
    os << "# run " << run << "\n";
    for (int i = 0; i < n; ++i) os << prefix << i << ",";
    for (std::size_t i = 0; i < tail.size(); ++i) os << tail[i] << (i + 1 < tail.size() ? "," : "\n");
    return os.str();
}

std::string csv_row(std::vector<double> const& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << fmt(v[i]) << (i + 1 < v.size() ? "," : "\n");
    return os.str();
}

// ---------------------------------------------------------------------------

void cmd_weights(Options const& o, RunRecord& rec) {
    WeightSystem ws = build_weight_system(parse_setting(o.setting));
    rec.setting = ws.setting.label();
    rec.finalize_id();
    Output out(o, rec);
    json dirs = json::array();
    std::string csv = csv_header(rec.id, "d", ws.D, {"mult"});
    for (auto const& d : ws.directions) {
        dirs.push_back(json::array({to_json(d.ivec), d.mult}));
        std::vector<double> row;
        for (Eigen::Index j = 0; j < d.ivec.size(); ++j) row.push_back(static_cast<double>(d.ivec[j]));
        row.push_back(d.mult);
        csv += csv_row(row);
    }
    json rows = json::array();
    for (Eigen::Index i = 0; i < ws.int_rows.rows(); ++i) rows.push_back(to_json(IVec(ws.int_rows.row(i).transpose())));
    auto bounds = degree_bounds(ws.setting);
    json cont = {{"ell", ell(ws)}, {"max_local_degree", bounds.max_local_degree}, {"conjectural", bounds.conjectural}};
    cont["closed_form"] = bounds.continuity_closed_form ? json(*bounds.continuity_closed_form) : json(nullptr);
    out.emit("weights", csv,
             {{"setting", rec.setting},
              {"N", ws.N()},
              {"r", ws.r()},
              {"factors", ws.factors},
              {"directions", dirs},
              {"weight_rows", rows},
              {"rho_h", to_json(ws.rho_h)},
              {"rho_g", to_json(ws.rho_g)},
              {"d", ws.d},
              {"continuity", cont}});
}

void cmd_sample(Options const& o, RunRecord& rec) {
    WeightSystem ws = build_weight_system(parse_setting(o.setting));
    Vec lambda = read_lambda(o);
    check_spectrum(ws, lambda);
    rec.setting = ws.setting.label();
    rec.lambda = to_std(lambda);
    rec.parameters = {{"samples", o.samples}, {"grid", o.grid}, {"raw", o.raw}, {"format", o.format}};
    rec.finalize_id();
    Output out(o, rec);
    HistGrid g = auto_grid(ws, lambda, o.grid);
    RunOptions ro;
    ro.workers = o.workers;
    Histogram h = run_histogram(ws, lambda, o.samples, g, o.seed, ro);
    std::vector<std::string> tail;
    for (int a = 0; a < g.dim(); ++a) tail.push_back("hi" + std::to_string(a));
    tail.push_back("count");
    std::string csv = csv_header(rec.id, "lo", g.dim(), tail);
    json counts = json::array();
    for (long long i = 0; i < g.size(); ++i) {
        auto cell = g.unflatten(i);
        std::vector<double> row;
        for (int a = 0; a < g.dim(); ++a) row.push_back(g.lo[a] + cell[a] * g.width(a));
        for (int a = 0; a < g.dim(); ++a) row.push_back(g.lo[a] + (cell[a] + 1) * g.width(a));
        row.push_back(static_cast<double>(h.counts[i]));
        csv += csv_row(row);
        counts.push_back(h.counts[i]);
    }
    out.emit("histogram", csv,
             {{"setting", rec.setting},
              {"lambda", rec.lambda},
              {"lambda_shift", lambda.mean()},
              {"seed", o.seed},
              {"count", h.total},
              {"overflow", h.overflow},
              {"grid", to_json(g)},
              {"counts", counts}});
    if (o.raw) {
        auto pts = sample_points(ws, lambda, o.samples, o.seed, ro);
        std::string text = csv_header(rec.id, "x", ws.D, {});
        text.pop_back();  // no tail columns: drop the trailing comma
        text.back() = '\n';
        for (auto const& p : pts) text += csv_row(to_std(p));
        if (!o.out.empty()) {
            write_file(fs::path(o.out) / "samples.csv", text);
            rec.artifacts.push_back("samples.csv");
        }
    }
}

void cmd_density(Options const& o, RunRecord& rec) {
    WeightSystem ws = build_weight_system(parse_setting(o.setting));
    Vec lambda = read_lambda(o);
    Evaluator kind = parse_evaluator(o.evaluator);
    rec.setting = ws.setting.label();
    rec.lambda = to_std(lambda);
    rec.parameters = {{"evaluator", o.evaluator}, {"grid", o.grid},   {"cutoff", o.cutoff}, {"nodes", o.nodes},
                      {"point", o.point},         {"error_estimate", o.error_estimate}, {"format", o.format}};
    rec.finalize_id();
    Output out(o, rec);
    DensityEvaluator ev(ws, lambda, kind, quad_params(o));
    json params = json::object();
    if (ev.quad()) params = {{"cutoff", ev.quad()->params().cutoff}, {"nodes", ev.quad()->params().nodes_per_axis}};

    if (!o.point.empty()) {
        Vec x = parse_vector(o.point);
        check_point(ws, x);
        x = center_factors(ws, x);
        double J, dens;
        if (kind == Evaluator::Quad) {
            J = ev.quad()->J(x);
            dens = ev.quad()->density(x);
        } else {
            ExactJ ej(ws, *integral_part(ws, lambda));
            J = ej.J(x);
            dens = ej.density(x);
        }
        std::string csv = csv_header(rec.id, "x", ws.D, {"J", "density"});
        auto row = to_std(x);
        row.push_back(J);
        row.push_back(dens);
        csv += csv_row(row);
        out.emit("density_point", csv,
                 {{"setting", rec.setting}, {"lambda", rec.lambda}, {"evaluator", o.evaluator}, {"quadrature", params},
                  {"point", to_json(x)}, {"J", J}, {"density", dens}});
        return;
    }

    HistGrid g = auto_grid(ws, lambda, o.grid);
    std::vector<std::string> names{"density"};
    std::vector<std::vector<double>> cols;
    double min_value = 0;
    if (kind == Evaluator::Quad) {
        auto dg = density_grid(ws, lambda, g, quad_params(o), o.workers, o.error_estimate);
        cols.push_back(dg.values);
        if (o.error_estimate) {
            names.push_back("error");
            cols.push_back(dg.err);
        }
        min_value = dg.min_value;
    } else {
        std::vector<double> vals(g.size(), 0.0);
        parallel_for(g.size(), o.workers, [&](long long i) {
            auto cell = g.unflatten(i);
            Vec f(g.dim());
            for (int a = 0; a < g.dim(); ++a) f[a] = g.center(a, cell[a]);
            vals[i] = ev(f).value_or(0.0);
        });
        for (double v : vals) min_value = std::min(min_value, v);
        cols.push_back(std::move(vals));
    }
    double mass = 0;
    for (double v : cols[0]) mass += v;
    mass *= g.cell_volume();
    if (out.csv())
        out.emit("density", grid_csv(g, names, cols, rec.id), {});
    else
        out.emit("density", "",
                 {{"setting", rec.setting}, {"lambda", rec.lambda}, {"evaluator", o.evaluator}, {"quadrature", params},
                  {"grid", to_json(g)}, {"mass", mass}, {"min_value", min_value}, {"values", grid_json(g, names, cols)}});
    if (!o.out.empty())
        out.emit_json("summary.json", {{"mass", mass}, {"min_value", min_value}, {"quadrature", params}});
}

void cmd_hciz(Options const& o, RunRecord& rec) {
    Vec a = parse_vector(o.a), b = parse_vector(o.b);
    if (a.size() != b.size()) throw ValidationError("--a and --b must have the same length");
    if (o.mc < 0) throw ValidationError("--mc must be nonnegative");
    rec.lambda = to_std(a);
    rec.parameters = {{"a", to_std(a)}, {"b", to_std(b)}, {"mc", o.mc}, {"format", o.format}};
    rec.finalize_id();
    Output out(o, rec);
    double exact = hciz_value(a, b);
    json j = {{"a", to_json(a)}, {"b", to_json(b)}, {"analytic", exact}};
    std::string csv = csv_header(rec.id, "", 0, {"analytic", "mc_mean", "mc_std_error", "mc_count"});
    std::vector<double> row{exact};
    if (o.mc > 0) {
        auto e = mc_hciz(a, b, o.mc, o.seed);
        j["mc"] = {{"mean", e.mean}, {"std_error", e.std_error}, {"count", e.count}, {"seed", o.seed}};
        row.insert(row.end(), {e.mean, e.std_error, static_cast<double>(e.count)});
        csv += csv_row(row);
    } else {
        csv += fmt(exact) + ",,,\n";
    }
    out.emit("hciz", csv, j);
}

void cmd_mult(Options const& o, RunRecord& rec, bool recover) {
    WeightSystem ws = build_weight_system(parse_setting(o.setting));
    Weight lam = integer_weight(read_lambda(o));
    check_dominant_integral(ws, lam);
    rec.setting = ws.setting.label();
    rec.lambda.assign(lam.begin(), lam.end());
    rec.parameters = {{"recover", recover}, {"format", o.format}};
    if (recover) {
        rec.parameters["evaluator"] = o.evaluator;
        rec.parameters["torus_grid"] = o.torus_grid;
        rec.parameters["cutoff"] = o.cutoff;
        rec.parameters["nodes"] = o.nodes;
        rec.parameters["mu"] = o.mu;
    }
    rec.finalize_id();
    Output out(o, rec);
    MultiplicityTable t = restrict_decompose(ws, lam);
    if (!recover) {
        std::string csv = csv_header(rec.id, "mu", ws.D, {"mult", "dim"});
        for (auto const& [mu, m] : t.normalized(ws.factors)) {
            std::vector<double> row(mu.begin(), mu.end());
            row.push_back(static_cast<double>(m));
            row.push_back(static_cast<double>(weyl_dim(ws.factors, mu)));
            csv += csv_row(row);
        }
        out.emit("multiplicities", csv, to_json(t, ws.factors));
        return;
    }

    Evaluator kind = parse_evaluator(o.evaluator);
    BoxSpline bs = weight_box_spline(ws);
    RecoveryProblem P = recovery_problem(ws, lam, bs);
    std::vector<double> J(P.points.size());
    if (kind == Evaluator::Exact) {
        ExactJ ej(ws, t);
        parallel_for(static_cast<long long>(J.size()), o.workers, [&](long long i) { J[i] = ej.J(P.points[i]); });
    } else {
        Vec spectrum(ws.N());
        for (int i = 0; i < ws.N(); ++i) spectrum[i] = static_cast<double>(lam[i]);
        spectrum = Vec(spectrum.array() - spectrum.mean()) + ws.rho_g;
        QuadDensity qd(ws, spectrum, quad_params(o));
        parallel_for(static_cast<long long>(J.size()), o.workers, [&](long long i) { J[i] = qd.J(P.points[i]); });
    }
    std::vector<Weight> targets;
    if (!o.mu.empty()) {
        Weight mu = integer_weight(parse_vector(o.mu));
        if (static_cast<int>(mu.size()) != ws.D) throw ValidationError("--mu must have length " + std::to_string(ws.D));
        if (!dominant_per_factor(ws.factors, mu)) throw ValidationError("--mu must be dominant in every factor");
        targets.push_back(mu);
    } else {
        for (auto const& [mu, m] : t.entries) targets.push_back(mu);
    }
    std::string csv = csv_header(rec.id, "mu", ws.D, {"table", "recovered", "raw", "residual"});
    json rows = json::array();
    bool agree = true;
    for (auto const& mu : targets) {
        auto res = recover_multiplicity(ws, P, J, mu, o.torus_grid);
        auto it = t.entries.find(mu);
        long long expect = it == t.entries.end() ? 0 : it->second;
        agree = agree && expect == res.value;
        Weight nmu = normalize_per_factor(ws.factors, mu);
        std::vector<double> row(nmu.begin(), nmu.end());
        row.insert(row.end(), {static_cast<double>(expect), static_cast<double>(res.value), res.raw, res.residual});
        csv += csv_row(row);
        rows.push_back({{"mu", nmu}, {"table", expect}, {"recovered", res.value}, {"raw", res.raw},
                        {"imag", res.imag}, {"residual", res.residual}, {"torus_grid", res.grid}});
    }
    out.emit("recovery", csv,
             {{"setting", rec.setting}, {"lambda", lam}, {"evaluator", o.evaluator}, {"points", P.points.size()},
              {"agree", agree}, {"entries", rows}});
}

void cmd_spline(Options const& o, RunRecord& rec, bool mass) {
    WeightSystem ws = build_weight_system(parse_setting(o.setting));
    rec.setting = ws.setting.label();
    rec.parameters = {{"mass", mass}, {"point", o.point}, {"refine", o.refine}, {"format", o.format}};
    rec.finalize_id();
    Output out(o, rec);
    BoxSpline bs = weight_box_spline(ws);
    if (mass) {
        if (o.refine < 1) throw ValidationError("--refine must be >= 1");
        double m = spline_mass(ws, bs, o.refine);
        std::string csv = csv_header(rec.id, "", 0, {"refine", "mass"}) + csv_row({double(o.refine), m});
        out.emit("spline_mass", csv, {{"setting", rec.setting}, {"refine", o.refine}, {"mass", m}});
        return;
    }
    if (o.point.empty()) throw ValidationError("spline eval needs --point");
    Vec x = parse_vector(o.point);
    check_point(ws, x);
    x = center_factors(ws, x);
    double v = bs(to_orthonormal(ws, x));
    auto row = to_std(x);
    row.push_back(v);
    std::string csv = csv_header(rec.id, "x", ws.D, {"value"}) + csv_row(row);
    out.emit("spline", csv, {{"setting", rec.setting}, {"point", to_json(x)}, {"value", v}});
}

void cmd_compare(Options const& o, RunRecord& rec) {
    WeightSystem ws = build_weight_system(parse_setting(o.setting));
    Vec lambda = read_lambda(o);
    rec.setting = ws.setting.label();
    rec.lambda = to_std(lambda);
    rec.parameters = {{"samples", o.samples},     {"grid", o.grid},         {"evaluator", o.evaluator},
                      {"cutoff", o.cutoff},       {"nodes", o.nodes},       {"smoothing", o.smoothing},
                      {"tolerance", o.tolerance}, {"format", o.format}};
    rec.finalize_id();
    Output out(o, rec);
    CompareOptions co;
    co.samples = o.samples;
    co.seed = o.seed;
    co.bins = o.grid;
    co.evaluator = parse_evaluator(o.evaluator);
    co.quad = quad_params(o);
    co.smoothing_bins = o.smoothing;
    co.tolerance = o.tolerance;
    co.workers = o.workers;
    auto rep = run_comparison(ws, lambda, co);
    std::vector<std::string> names{"histogram", "density", "smoothed_histogram", "smoothed_density"};
    std::vector<std::vector<double>> cols{rep.histogram, rep.density, rep.smoothed_histogram, rep.smoothed_density};
    json lines = json::array();
    for (auto const& l : rep.lines) lines.push_back(to_json(l));
    json report = {{"setting", rec.setting}, {"lambda", rec.lambda},     {"evaluator", o.evaluator},
                   {"samples", o.samples},   {"seed", o.seed},           {"grid", to_json(rep.grid)},
                   {"overflow", rep.overflow}, {"smoothing_bins", o.smoothing}, {"discrepancy", to_json(rep.disc)},
                   {"tolerance", o.tolerance}, {"pass", rep.pass},        {"singular_lines", lines}};
    if (!o.out.empty()) {
        if (out.csv())
            out.emit("comparison", grid_csv(rep.grid, names, cols, rec.id), {});
        else
            out.emit("comparison", "", {{"grid", to_json(rep.grid)}, {"values", grid_json(rep.grid, names, cols)}});
    }
    out.emit_json("report.json", report, true);
}

int run_guarded(RunRecord& rec, Options const& o, std::function<void()> const& body) {
    auto t0 = std::chrono::steady_clock::now();
    rec.started = utc_now();
    int code = kOk;
    try {
        body();
    } catch (ValidationError const& e) {
        code = kValidation;
        rec.error = e.what();
    } catch (NumericalAlarm const& e) {
        code = kNumerical;
        rec.error = e.what();
    } catch (CapExceeded const& e) {
        code = kCap;
        rec.error = e.what();
    } catch (std::exception const& e) {
        code = kInternal;
        rec.error = e.what();
    }
    rec.exit_code = code;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (code != kOk) std::cerr << "error: " << rec.error << "\n";
    if (!o.out.empty()) {
        try {
            fs::create_directories(o.out);
            write_file(fs::path(o.out) / "record.json", rec.to_json().dump(2) + "\n");
        } catch (std::exception const& e) {
            std::cerr << "error: cannot write record: " << e.what() << "\n";
            if (code == kOk) code = kValidation;
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projected orbital densities, sampling and restriction multiplicities"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    Options o;
    Flags flags;

    auto add_setting = [&](CLI::App* c) { c->add_option("--setting", o.setting, "dst:n1,n2[,...] | bos:n,k | fer:n,k")->required(); };
    auto add_lambda = [&](CLI::App* c) {
        c->add_option("--lambda", o.lambda, "comma-separated spectrum");
        c->add_option("--lambda-file", o.lambda_file, "JSON array or {\"lambda\": [...]}");
    };
    auto add_quad = [&](CLI::App* c) {
        c->add_option("--cutoff", o.cutoff, "quadrature box half-width (0 = automatic)");
        c->add_option("--nodes", o.nodes, "quadrature nodes per axis (0 = automatic)");
    };
    auto add_io = [&](CLI::App* c) {
        c->add_option("--out", o.out, "run directory for record.json and artifacts");
        c->add_option("--format", o.format, "payload format")->check(CLI::IsMember({"csv", "json"}));
        c->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    };
    auto add_seed = [&](CLI::App* c) { return c->add_option("--seed", o.seed, "RNG seed (env QMARG_SEED when absent)"); };
    auto add_eval = [&](CLI::App* c) {
        c->add_option("--evaluator", o.evaluator, "density evaluator")->check(CLI::IsMember({"quad", "exact"}));
    };

    auto* weights = app.add_subcommand("weights", "weight system of a setting");
    add_setting(weights);
    add_io(weights);

    auto* sample = app.add_subcommand("sample", "Monte Carlo histogram of marginal spectra");
    add_setting(sample);
    add_lambda(sample);
    sample->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
    sample->add_option("--grid", o.grid, "bins per axis")->check(CLI::PositiveNumber);
    sample->add_flag("--raw", o.raw, "also write samples.csv (needs --out)");
    CLI::Option* seed_sample = add_seed(sample);
    add_io(sample);

    auto* density = app.add_subcommand("density", "projected orbital density on a grid or at a point");
    add_setting(density);
    add_lambda(density);
    add_eval(density);
    add_quad(density);
    density->add_option("--grid", o.grid, "bins per axis")->check(CLI::PositiveNumber);
    density->add_option("--point", o.point, "evaluate at one point of t (length D)");
    density->add_flag("--error-estimate", o.error_estimate, "quadrature error column");
    add_io(density);
    auto* density_exact = density->add_subcommand("exact", "shorthand for --evaluator exact");
    density_exact->fallthrough();

    auto* hciz = app.add_subcommand("hciz", "HCIZ integral, analytic and Monte Carlo");
    hciz->add_option("--a", o.a)->required();
    hciz->add_option("--b", o.b)->required();
    hciz->add_option("--mc", o.mc, "Monte Carlo samples (0 = none)");
    CLI::Option* seed_hciz = add_seed(hciz);
    add_io(hciz);

    auto* mult = app.add_subcommand("mult", "restriction multiplicities for an integral highest weight");
    add_setting(mult);
    add_lambda(mult);
    add_io(mult);
    auto* recover = mult->add_subcommand("recover", "recover the multiplicities from J by the torus integral");
    recover->fallthrough();
    add_eval(recover);
    add_quad(recover);
    recover->add_option("--torus-grid", o.torus_grid, "torus nodes per axis (0 = automatic)");
    recover->add_option("--mu", o.mu, "single H-weight to recover (length D)");

    auto* spline = app.add_subcommand("spline", "box spline of the weight directions");
    add_setting(spline);
    add_io(spline);
    spline->require_subcommand(1);
    auto* spline_eval = spline->add_subcommand("eval", "value at a point");
    spline_eval->fallthrough();
    spline_eval->add_option("--point", o.point, "point of t (length D)")->required();
    auto* spline_mass_cmd = spline->add_subcommand("mass", "total mass by a lattice sum");
    spline_mass_cmd->fallthrough();
    spline_mass_cmd->add_option("--refine", o.refine, "lattice refinement K");

    auto* compare = app.add_subcommand("compare", "Monte Carlo histogram against the analytic density");
    add_setting(compare);
    add_lambda(compare);
    add_eval(compare);
    add_quad(compare);
    compare->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
    compare->add_option("--grid", o.grid, "bins per axis")->check(CLI::PositiveNumber);
    compare->add_option("--smoothing", o.smoothing, "smoothing width in bins (0 = none)")->check(CLI::NonNegativeNumber);
    compare->add_option("--tolerance", o.tolerance, "pass threshold on sup discrepancy / peak");
    CLI::Option* seed_compare = add_seed(compare);
    add_io(compare);

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    RunRecord rec;
    if (weights->parsed()) {
        rec.command = "weights";
        return run_guarded(rec, o, [&] { cmd_weights(o, rec); });
    }
    if (sample->parsed()) {
        rec.command = "sample";
        flags.seed = seed_sample;
        return run_guarded(rec, o, [&] {
            resolve_seed(o, flags, rec);
            cmd_sample(o, rec);
        });
    }
    if (density->parsed()) {
        if (density_exact->parsed()) o.evaluator = "exact";
        rec.command = "density";
        return run_guarded(rec, o, [&] { cmd_density(o, rec); });
    }
    if (hciz->parsed()) {
        rec.command = "hciz";
        flags.seed = seed_hciz;
        return run_guarded(rec, o, [&] {
            resolve_seed(o, flags, rec);
            cmd_hciz(o, rec);
        });
    }
    if (mult->parsed()) {
        bool rc = recover->parsed();
        rec.command = rc ? "mult recover" : "mult";
        return run_guarded(rec, o, [&] { cmd_mult(o, rec, rc); });
    }
    if (spline->parsed()) {
        bool m = spline_mass_cmd->parsed();
        rec.command = m ? "spline mass" : "spline eval";
        return run_guarded(rec, o, [&] { cmd_spline(o, rec, m); });
    }
    if (compare->parsed()) {
        rec.command = "compare";
        flags.seed = seed_compare;
        return run_guarded(rec, o, [&] {
            resolve_seed(o, flags, rec);
            cmd_compare(o, rec);
        });
    }
    return kInternal;
}
