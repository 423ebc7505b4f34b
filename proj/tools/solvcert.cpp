// solvcert command-line front end.
//
// Exit codes: 0 success / certified, 2 computed but not certified, 1 error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "solvcert/boundary.hpp"
#include "solvcert/cert.hpp"
#include "solvcert/netmodel.hpp"
#include "solvcert/report.hpp"
#include "solvcert/screen.hpp"

using nlohmann::json;
using namespace solvcert;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kNotCertified = 2;

std::size_t default_threads() {
    if (const char* env = std::getenv("SOLVCERT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

struct Common {
    std::string case_path;
    std::string output;
    std::uint64_t seed = 1;
    std::size_t threads = default_threads();
};

struct InjectionArgs {
    std::string file;
    std::optional<double> scale;
    double pf = 0.9;
};

void add_common(CLI::App* sub, Common& c, bool needs_case = true) {
    auto* opt = sub->add_option("--case,-c", c.case_path, "MATPOWER .m or JSON case file");
    if (needs_case) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--output,-o", c.output, "Write the artifact here instead of stdout");
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker thread cap (default from SOLVCERT_THREADS)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

void add_injection(CLI::App* sub, InjectionArgs& a) {
    sub->add_option("--injections", a.file, "JSON map {bus_id: {P, Q}} of net injections in p.u.")
        ->check(CLI::ExistingFile);
    sub->add_option("--scale", a.scale, "Homogeneous loading gain added to the case injection");
    sub->add_option("--pf", a.pf, "Power factor of the homogeneous loading")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
}

json config_echo(const CLI::App& sub, const Common& c) {
    json args = json::object();
    for (const CLI::Option* o : sub.get_options()) {
        if (o->get_name() == "--help" || o->count() == 0) continue;
        const auto res = o->results();
        args[o->get_name()] = res.size() == 1 ? json(res.front()) : json(res);
    }
    return {{"command", sub.get_name()}, {"seed", c.seed}, {"threads", c.threads}, {"args", args}};
}

void emit(const Common& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.output);
    if (!f) throw std::runtime_error("cannot write " + c.output);
    f << text;
}

void emit_json(const CLI::App& sub, const Common& c, json result) {
    json doc{{"config", config_echo(sub, c)}, {"result", std::move(result)}};
    emit(c, doc.dump(2) + "\n");
}

std::shared_ptr<const NetworkModel> load_model(const std::string& path) {
    return std::make_shared<const NetworkModel>(build_network(load_case(path)));
}

CVector target_injection(const NetworkModel& model, const InjectionArgs& a) {
    CVector s = model.s_base;
    if (!a.file.empty()) {
        std::ifstream f(a.file);
        json doc;
        try {
            doc = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("injection file: ") + e.what(), 0);
        }
        if (!doc.is_object()) throw ParseError("injection file: expected an object keyed by bus id", 0);
        for (const auto& [key, val] : doc.items()) {
            long id = 0;
            try {
                id = std::stol(key);
            } catch (const std::exception&) {
                throw ParseError("injection file: bad bus id '" + key + "'", 0);
            }
            const auto it = model.index_of.find(id);
            if (it == model.index_of.end())
                throw ModelError("injection file: bus " + key + " is not a PQ bus of the case");
            s[it->second] = Complex(val.value("P", 0.0), val.value("Q", 0.0));
        }
    }
    if (a.scale) {
        const CVector du = homogeneous_direction(model.n, a.pf);
        for (std::size_t i = 0; i < model.n; ++i) s[i] += *a.scale * du[i];
    }
    return s;
}

SamplingSpec sampling(std::size_t points, double range_percent) {
    if (range_percent < 0) throw std::invalid_argument("--range must be non-negative");
    SamplingSpec spec;
    spec.count = points;
    spec.range = range_percent / 100.0;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-flow solvability certificates for radial distribution feeders"};
    app.require_subcommand(1);

    Common c;
    InjectionArgs inj;
    NewtonOptions newton;
    double r = 0.5;
    std::size_t points = 1000;
    double range = 500.0;
    std::string mode = "fast";
    std::size_t rays = 180;
    std::optional<double> trace_r;
    bool with_true = false;
    double tol = 1e-6;
    std::string format = "csv";
    std::vector<double> pf_grid;
    std::vector<std::string> bench_cases;
    std::size_t reps = 1000;
    std::size_t synth_buses = 10;

    auto* pf = app.add_subcommand("pf", "Solve the power flow at the case injection");
    add_common(pf, c);
    pf->add_option("--tol", newton.tol, "Mismatch tolerance")->capture_default_str();
    pf->add_option("--max-iter", newton.max_iter, "Newton iteration cap")->capture_default_str();

    auto* cert = app.add_subcommand("certify", "r-free solvability certificate around the case base point");
    add_common(cert, c);
    add_injection(cert, inj);

    auto* cert_r = app.add_subcommand("certify-r", "Fixed-radius certificate with voltage envelope");
    add_common(cert_r, c);
    add_injection(cert_r, inj);
    cert_r->add_option("--r", r, "Voltage-bound radius")->required()->check(CLI::PositiveNumber);

    auto* screen = app.add_subcommand("screen", "Classify a sampled injection cloud");
    add_common(screen, c);
    screen->add_option("--points", points, "Cloud size")->capture_default_str();
    screen->add_option("--range", range, "Half-width of the sampling range in percent of |s_i|")
        ->capture_default_str();
    screen->add_option("--mode", mode, "fast or brute")->capture_default_str()->check(
        CLI::IsMember({"fast", "brute"}));

    auto* index = app.add_subcommand("index", "Fraction of a sampled cloud certified by the base point");
    add_common(index, c);
    index->add_option("--points", points, "Cloud size")->capture_default_str();
    index->add_option("--range", range, "Half-width of the sampling range in percent of |s_i|")
        ->capture_default_str();

    auto* gain = app.add_subcommand("gain", "Certified admissible gain and homogeneous-direction gains");
    add_common(gain, c);
    gain->add_option("--pf", inj.pf, "Power factor of the homogeneous direction")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));

    auto* boundary = app.add_subcommand("boundary", "Trace the certified boundary in the total-P/total-Q plane");
    add_common(boundary, c);
    boundary->add_option("--rays", rays, "Number of rays")->capture_default_str();
    boundary->add_option("--r", trace_r, "Fixed voltage-bound radius (default: r-free)");
    boundary->add_flag("--with-true", with_true, "Also compute the loadability limit per ray");
    boundary->add_option("--tol", tol, "Relative bisection tolerance")->capture_default_str();
    boundary->add_option("--format", format, "csv or json")->capture_default_str()->check(
        CLI::IsMember({"csv", "json"}));

    auto* coal = app.add_subcommand("coalescence", "Covering ratio over a power-factor grid");
    add_common(coal, c);
    coal->add_option("--pf-grid", pf_grid, "Power factors (default 0.05..1.0 step 0.05)");

    auto* bench = app.add_subcommand("bench", "Repeated-certificate timing over several cases");
    add_common(bench, c, false);
    bench->add_option("--cases", bench_cases, "Case files")->required()->check(CLI::ExistingFile);
    bench->add_option("--reps", reps, "Certificates per case")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Write a synthetic radial feeder in MATPOWER format");
    add_common(synth, c, false);
    synth->add_option("--buses", synth_buses, "Bus count including the slack")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    try {
        if (*pf) {
            const auto model = load_model(c.case_path);
            const PFSolution sol = solve_pf(*model, model->s_base, newton);
            json v = json::array();
            for (std::size_t i = 0; i < model->n; ++i)
                v.push_back({{"bus", model->bus_ids[i]},
                             {"vm", std::abs(sol.v[i])},
                             {"va_deg", std::arg(sol.v[i]) * 180.0 / 3.14159265358979323846},
                             {"re", sol.v[i].real()},
                             {"im", sol.v[i].imag()}});
            emit_json(*pf, c,
                      {{"iterations", sol.iterations}, {"mismatch", sol.final_mismatch}, {"voltages", v}});
            return kOk;
        }
        if (*cert || *cert_r) {
            const auto& sub = *cert ? *cert : *cert_r;
            const auto model = load_model(c.case_path);
            const BasePoint base = base_point(model, model->s_base);
            const CVector s = target_injection(*model, inj);
            const CertificateReport rep = *cert ? certify(base, s) : certify_r(base, s, r);
            emit_json(sub, c, to_json(rep));
            return rep.passed ? kOk : kNotCertified;
        }
        if (*screen) {
            const auto model = load_model(c.case_path);
            const auto cloud = sample_injections(*model, model->s_base, sampling(points, range), c.seed);
            ScreenOptions opts;
            opts.threads = c.threads;
            const ScreenResult res = mode == "fast" ? fast_screen(model, cloud, opts)
                                                    : brute_screen(*model, cloud, opts);
            json out = to_json(res);
            out["mode"] = mode;
            emit_json(*screen, c, std::move(out));
            return kOk;
        }
        if (*index) {
            const auto model = load_model(c.case_path);
            const BasePoint base = base_point(model, model->s_base);
            const auto cloud = sample_injections(*model, model->s_base, sampling(points, range), c.seed);
            emit_json(*index, c,
                      {{"index", solvability_index(base, cloud, c.threads)}, {"points", cloud.points.size()}});
            return kOk;
        }
        if (*gain) {
            const auto model = load_model(c.case_path);
            const BasePoint base = base_point(model, model->s_base);
            GainReport g = certified_admissible_gain(base);
            const CVector du = homogeneous_direction(model->n, inj.pf);
            g.lambda_b = certified_gain_direction(base, du);
            g.lambda_r = loadability_limit(*model, base.s_star, du);
            g.direction = du;
            emit_json(*gain, c, to_json(g));
            return kOk;
        }
        if (*boundary) {
            const auto model = load_model(c.case_path);
            const BasePoint base = base_point(model, model->s_base);
            TraceOptions opts;
            opts.n_rays = rays;
            opts.r = trace_r;
            opts.tol_rel = tol;
            opts.with_true = with_true;
            opts.threads = c.threads;
            const BoundaryTrace trace = trace_boundary_2d(base, homogeneous_plane(model->n), opts);
            if (format == "json") {
                emit_json(*boundary, c, to_json(trace));
            } else {
                std::ostringstream os;
                os << "# " << config_echo(*boundary, c).dump() << '\n';
                write_csv(os, trace);
                emit(c, os.str());
            }
            return kOk;
        }
        if (*coal) {
            if (pf_grid.empty())
                for (int k = 1; k <= 20; ++k) pf_grid.push_back(0.05 * k);
            const auto model = load_model(c.case_path);
            const BasePoint base = base_point(model, model->s_base);
            emit_json(*coal, c, to_json(coalescence_scan(base, pf_grid)));
            return kOk;
        }
        if (*bench) {
            std::vector<BasePoint> bases;
            for (const auto& path : bench_cases) {
                const auto model = load_model(path);
                bases.push_back(base_point(model, model->s_base));
            }
            emit_json(*bench, c, to_json(runtime_scaling(bases, reps, c.seed)));
            return kOk;
        }
        if (*synth) {
            emit(c, to_matpower(synthetic_radial_feeder(synth_buses, c.seed)));
            return kOk;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: parse failure";
        if (e.line() > 0) std::cerr << " at line " << e.line();
        std::cerr << ": " << e.what() << '\n';
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}
