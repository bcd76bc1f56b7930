#include "cli.hpp"

#include "levyopt/g_objective.hpp"
#include "levyopt/geometry.hpp"
#include "levyopt/mc_lab.hpp"
#include "levyopt/model_io.hpp"
#include "levyopt/optimizer.hpp"
#include "levyopt/qmeasure.hpp"
#include "levyopt/solution_curves.hpp"
#include "levyopt/transform.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#ifndef LEVYOPT_VERSION
#define LEVYOPT_VERSION "unknown"
#endif

namespace levyopt::cli {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Usage or input problem; exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json vec(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
    return a;
}

json mat(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec(m.row(r).transpose()));
    return a;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string fmt(const Vector& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i));
    return s + "]";
}

/// Plain numbers for CSV cells.
std::string cell(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

struct Options {
    std::string command;
    std::string model_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<int> grid;
    std::string policy = "optimal";
    std::string policy_file;
    int points = 0;
    std::optional<double> lo;
    std::optional<double> hi;
    std::optional<double> quadrature_tol;
    std::optional<double> optimizer_tol;
    std::optional<double> drift_tol;
};

struct Check {
    std::string name;
    std::string status;  // PASS, FAIL or SKIP
    std::string detail;
};

class Session {
public:
    Session(Options options, std::ostream& out, std::ostream& err)
        : opt_(std::move(options)), out_(out), err_(err) {
        // "models/merton_diffusion" is accepted for "models/merton_diffusion.toml"
        if (!fs::exists(opt_.model_path) && fs::exists(opt_.model_path + ".toml")) opt_.model_path += ".toml";
        std::ifstream in(opt_.model_path, std::ios::binary);
        if (!in) throw UsageError("cannot open model file '" + opt_.model_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text_ = ss.str();
        model_ = parse_model(text_, opt_.model_path);
        auto& tol = model_.problem.tol;
        if (opt_.quadrature_tol) tol.quadrature = *opt_.quadrature_tol;
        if (opt_.optimizer_tol) tol.optimizer = *opt_.optimizer_tol;
        if (opt_.drift_tol) tol.drift = *opt_.drift_tol;
        if (opt_.seed) model_.simulation.seed = *opt_.seed;
        if (opt_.paths) model_.simulation.paths = *opt_.paths;
        if (opt_.grid) model_.simulation.steps = *opt_.grid;

        std::string stem = fs::path(opt_.model_path).stem().string();
        if (stem.empty()) stem = "model";
        dir_ = fs::path(opt_.out_dir) / stem;
    }

    const Model& model() const { return model_; }
    const LevyTriplet& triplet() const { return model_.triplet; }
    const ProblemSpec& problem() const { return model_.problem; }
    const Tolerances& tol() const { return model_.problem.tol; }
    const Options& options() const { return opt_; }
    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }

    void artifact(const std::string& name, const std::string& content) { artifacts_.emplace_back(name, content); }
    void artifact(const std::string& name, const json& j) { artifact(name, j.dump(2) + "\n"); }

    const PortfolioSolution& solution() {
        if (!solution_) {
            solution_ = solve_portfolio(triplet(), problem().constraints, problem().p, tol());
        }
        return *solution_;
    }

    /// Writes artifacts and the manifest; artifacts are byte-identical for identical inputs.
    void flush() {
        fs::create_directories(dir_);
        json files = json::array();
        for (const auto& [name, content] : artifacts_) {
            std::ofstream f(dir_ / name, std::ios::binary);
            f << content;
            if (!f) throw UsageError("cannot write " + (dir_ / name).string());
            files.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a", fnv1a_hex(content)}});
        }
        json manifest = {
            {"tool", "levyopt"},
            {"version", LEVYOPT_VERSION},
            {"model_schema", kModelSchemaVersion},
            {"command", opt_.command},
            {"model", {{"path", opt_.model_path}, {"name", model_.name}, {"fnv1a", fnv1a_hex(text_)}}},
            {"simulation",
             {{"seed", model_.simulation.seed}, {"paths", model_.simulation.paths}, {"grid", model_.simulation.steps}}},
            {"policy", opt_.policy},
            {"artifacts", files},
        };
        std::ofstream f(dir_ / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << "\n";
        out_ << "artifacts: " << dir_.string() << "\n";
    }

private:
    Options opt_;
    std::ostream& out_;
    std::ostream& err_;
    std::string text_;
    Model model_;
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> artifacts_;
    std::optional<PortfolioSolution> solution_;
};

json solution_json(const PortfolioSolution& s) {
    json alternatives = json::array();
    for (const auto& v : s.alternative_argmax) alternatives.push_back(vec(v));
    return {
        {"pi_hat", vec(s.pi_hat)},
        {"g_star", num(s.g_star)},
        {"a", num(s.a)},
        {"location", to_string(s.location)},
        {"G_at_zero", num(s.G_at_zero)},
        {"finiteness", to_string(s.finiteness)},
        {"maximizer_attained", s.maximizer_attained},
        {"representative_in_C", s.representative_in_C},
        {"nuip_witness", vec(s.nuip_witness)},
        {"iterations", s.iterations},
        {"tolerance_achieved", num(s.tolerance_achieved)},
        {"alternative_argmax", alternatives},
        {"warnings", s.warnings},
    };
}

void print_solution(std::ostream& os, const PortfolioSolution& s) {
    os << "  pi_hat              " << fmt(s.pi_hat) << "\n"
       << "  g_star              " << fmt(s.g_star) << "\n"
       << "  a                   " << fmt(s.a) << "\n"
       << "  location            " << to_string(s.location) << "\n"
       << "  G(0, pi_hat)        " << fmt(s.G_at_zero) << "\n"
       << "  finiteness          " << to_string(s.finiteness) << "\n"
       << "  maximizer_attained  " << (s.maximizer_attained ? "yes" : "no") << "\n";
    if (!s.representative_in_C) os << "  representative      projection onto N-perp (not in C)\n";
    if (s.nuip_witness.size() > 0) os << "  nuip_witness        " << fmt(s.nuip_witness) << "\n";
    for (const auto& a : s.alternative_argmax) os << "  other argmax        " << fmt(a) << "\n";
    for (const auto& w : s.warnings) os << "  warning: " << w << "\n";
}

json triplet_json(const LevyTriplet& t) {
    json atoms = json::array();
    for (const auto& a : t.jumps.atoms) atoms.push_back({{"x", vec(a.x)}, {"lambda", num(a.lambda)}});
    json densities = json::array();
    for (const auto& d : t.jumps.densities) {
        densities.push_back({{"kind", d.kind_name()}, {"direction", vec(d.direction)}, {"support", {num(d.lo), num(d.hi)}}});
    }
    return {{"b", vec(t.b)}, {"c", mat(t.c)}, {"atoms", atoms}, {"densities", densities}};
}

bool solved_finite(const PortfolioSolution& s) {
    return s.finiteness == FinitenessVerdict::finite && std::isfinite(s.g_star);
}

SolutionCurves curves_for(Session& s) {
    const auto& sol = s.solution();
    if (!solved_finite(sol)) throw Error("no finite optimum (finiteness: " + to_string(sol.finiteness) + ")");
    return build_curves(sol.g_star, s.problem().p, s.problem().consumption, s.problem().horizon, s.problem().x0);
}

// --------------------------------------------------------------------------- validate

int cmd_validate(Session& s) {
    const auto& t = s.triplet();
    const auto report = validate_model(t, s.tol());
    json violations = json::array();
    for (const auto& v : report.violations) violations.push_back(v.message);
    json floors = json::array();
    for (Eigen::Index j = 0; j < t.dim(); ++j) floors.push_back(num(asset_jump_floor(t, j)));
    json moment;
    std::string moment_text;
    try {
        const bool finite = pth_moment_finite(t, s.problem().p);
        moment = finite;
        moment_text = finite ? "finite" : "infinite";
    } catch (const UnboundedSupportWithoutTailModel& e) {
        moment = e.what();
        moment_text = std::string("undecidable: ") + e.what();
    }
    s.artifact("validate.json", json{{"valid", report.valid()},
                                     {"violations", violations},
                                     {"dimension", t.dim()},
                                     {"jump_floor", floors},
                                     {"pth_moment_finite", moment}});
    auto& os = s.out();
    os << "model " << s.model().name << " (d = " << t.dim() << ")\n";
    os << "  valid               " << (report.valid() ? "yes" : "no") << "\n";
    for (const auto& v : report.violations) os << "  violation: " << v.message << "\n";
    os << "  p-th moment         " << moment_text << "\n";
    for (Eigen::Index j = 0; j < t.dim(); ++j) os << "  jump floor asset " << j << "  " << fmt(asset_jump_floor(t, j)) << "\n";
    return report.valid() ? 0 : 1;
}

// --------------------------------------------------------------------------- geometry / nuip

json nuip_json(const NuipVerdict& v, const LevyTriplet& t, const Tolerances& tol) {
    json j = {{"status", to_string(v.status)}, {"witness", vec(v.witness)}, {"reason", v.reason}};
    if (v.status == NuipStatus::violated) {
        const auto m = j_membership(t, v.witness, tol);
        j["j_clauses"] = {{"c_residual", num(m.c_residual)},
                          {"min_jump_gain", num(m.min_jump_gain)},
                          {"net_drift", num(m.net_drift)},
                          {"null_distance", num(m.null_distance)},
                          {"member", m.member(tol.geometry)}};
    }
    return j;
}

void print_nuip(std::ostream& os, const NuipVerdict& v, const LevyTriplet& t, const Tolerances& tol) {
    os << "  nuip                " << to_string(v.status) << "\n";
    if (!v.reason.empty()) os << "  reason              " << v.reason << "\n";
    if (v.status == NuipStatus::violated) {
        const auto m = j_membership(t, v.witness, tol);
        os << "  witness             " << fmt(v.witness) << "\n"
           << "    |c y|             " << fmt(m.c_residual) << "\n"
           << "    inf y.x on supp F " << fmt(m.min_jump_gain) << "\n"
           << "    y.b - int y.h dF  " << fmt(m.net_drift) << "\n"
           << "    dist(y, N)        " << fmt(m.null_distance) << "\n";
    }
}

int cmd_geometry(Session& s) {
    const auto& t = s.triplet();
    const auto g = analyze_geometry(t, s.problem().constraints, s.tol());
    json halfspaces = json::array();
    for (const auto& h : g.natural.halfspaces) halfspaces.push_back({{"a", vec(h.a)}, {"bound", num(h.bound)}});
    json atoms = json::array();
    for (const auto& a : g.natural.atoms) atoms.push_back(vec(a));
    json rays = json::array();
    for (const auto& r : g.recession_rays) rays.push_back(vec(r));
    s.artifact("geometry.json",
               json{{"constraints", s.problem().constraints.describe()},
                    {"natural_constraints", {{"halfspaces", halfspaces}, {"strict_atoms", atoms}}},
                    {"null_basis", mat(g.null_basis.transpose())},
                    {"recession_rays", rays},
                    {"nuip", nuip_json(g.nuip, t, s.tol())},
                    {"projection_closed", to_string(g.projection_closed)}});
    auto& os = s.out();
    os << "constraints: " << s.problem().constraints.describe() << "\n";
    os << "natural constraints (a . y <= bound):\n";
    if (g.natural.halfspaces.empty()) os << "  none (C0 is the whole space)\n";
    for (const auto& h : g.natural.halfspaces) os << "  " << fmt(h.a) << " . y <= " << fmt(h.bound) << "\n";
    os << "null investments: dimension " << g.null_basis.cols() << "\n";
    for (Eigen::Index k = 0; k < g.null_basis.cols(); ++k) os << "  " << fmt(Vector(g.null_basis.col(k))) << "\n";
    os << "recession rays of C cap C0: " << g.recession_rays.size() << "\n";
    for (const auto& r : g.recession_rays) os << "  " << fmt(r) << "\n";
    print_nuip(os, g.nuip, t, s.tol());
    os << "  projection closed   " << to_string(g.projection_closed) << "\n";
    return 0;
}

int cmd_nuip(Session& s) {
    const auto v = nuip_check(s.triplet(), s.problem().constraints, s.tol());
    s.artifact("nuip.json", nuip_json(v, s.triplet(), s.tol()));
    print_nuip(s.out(), v, s.triplet(), s.tol());
    return 0;
}

// --------------------------------------------------------------------------- transform

int cmd_transform(Session& s) {
    const auto& t = s.triplet();
    const auto& C = s.problem().constraints;
    const auto tr = build_transform(t, C, s.tol());
    const auto natural = natural_constraints(tr.triplet);
    json floors = json::array();
    json units = json::array();
    auto& os = s.out();
    os << "Lambda:\n";
    for (Eigen::Index r = 0; r < tr.Lambda.rows(); ++r) os << "  " << fmt(Vector(tr.Lambda.row(r).transpose())) << "\n";
    for (const auto& n : tr.notes) os << "  note: " << n << "\n";
    os << "transformed drift     " << fmt(tr.triplet.b) << "\n";
    for (Eigen::Index j = 0; j < t.dim(); ++j) {
        const double floor = asset_jump_floor(tr.triplet, j);
        const Vector e = Vector::Unit(t.dim(), j);
        const bool unit_ok = tr.constraints.contains(e, s.tol().geometry) && natural.contains_strict(e, s.tol().geometry);
        floors.push_back(num(floor));
        units.push_back(unit_ok);
        os << "  asset " << j << ": jump floor " << fmt(floor) << ", e_" << j << " admissible: " << (unit_ok ? "yes" : "no")
           << "\n";
    }
    const auto original = s.solution();
    const auto transformed = solve_portfolio(tr.triplet, tr.constraints, s.problem().p, s.tol());
    const double gap = std::abs(original.g_star - transformed.g_star);
    Vector back;
    try {
        back = map_portfolio_back(transformed.pi_hat, tr);
    } catch (const DomainError&) {
        back = tr.Lambda.transpose() * transformed.pi_hat;
    }
    os << "g_star original       " << fmt(original.g_star) << "\n"
       << "g_star transformed    " << fmt(transformed.g_star) << "\n"
       << "value gap             " << fmt(gap) << "\n"
       << "mapped-back pi        " << fmt(back) << "\n";

    json steps = json::array();
    for (const auto& y : tr.steps) steps.push_back(vec(y));
    s.artifact("transform.json", json{{"Lambda", mat(tr.Lambda)},
                                      {"steps", steps},
                                      {"right_inverse_of_Lambda_T", mat(tr.pinv_Lambda_T)},
                                      {"notes", tr.notes},
                                      {"triplet", triplet_json(tr.triplet)},
                                      {"jump_floor", floors},
                                      {"unit_vectors_admissible", units},
                                      {"g_star_original", num(original.g_star)},
                                      {"g_star_transformed", num(transformed.g_star)},
                                      {"value_gap", num(gap)},
                                      {"pi_transformed", vec(transformed.pi_hat)},
                                      {"pi_mapped_back", vec(back)}});
    Model m = s.model();
    m.name = s.model().name + "_transformed";
    m.triplet = tr.triplet;
    m.problem.constraints = tr.constraints;
    try {
        s.artifact("transformed_model.toml", write_model(m));
    } catch (const DomainError& e) {
        s.err() << "warning: transformed model not written: " << e.what() << "\n";
    }
    return 0;
}

// --------------------------------------------------------------------------- g-scan

int cmd_gscan(Session& s) {
    const auto& t = s.triplet();
    const auto d = t.dim();
    if (d > 2) throw UsageError("g-scan supports d <= 2, model has d = " + std::to_string(d));
    double radius = 2.0;
    if (!s.options().lo || !s.options().hi) {
        const auto& sol = s.solution();
        if (solved_finite(sol) && sol.pi_hat.allFinite()) radius = 1.5 * std::max(1.0, sol.pi_hat.cwiseAbs().maxCoeff());
    }
    const double lo = s.options().lo.value_or(-radius);
    const double hi = s.options().hi.value_or(radius);
    if (!(hi > lo)) throw UsageError("--hi must exceed --lo");
    const int n = s.options().points > 1 ? s.options().points : (d == 1 ? 201 : 41);
    const Objective obj(t, s.problem().p, s.tol());
    const Vector zero = Vector::Zero(d);

    std::ostringstream csv;
    csv << (d == 1 ? "y" : "y1,y2") << ",g,G0\n";
    auto row = [&](const Vector& y) {
        double g = std::nan("");
        double G = std::nan("");
        if (obj.in_domain(y)) {
            try {
                g = obj.value(y).value;
                if (std::isfinite(g)) G = obj.directional(zero, y);
            } catch (const Error&) {
            }
        }
        for (Eigen::Index i = 0; i < d; ++i) csv << cell(y(i)) << ",";
        csv << cell(g) << "," << cell(G) << "\n";
    };
    const int n2 = d == 1 ? 1 : n;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n2; ++k) {
            Vector y(d);
            y(0) = lo + (hi - lo) * i / (n - 1);
            if (d == 2) y(1) = lo + (hi - lo) * k / (n - 1);
            row(y);
        }
    }
    s.artifact("g_scan.csv", csv.str());
    s.out() << "g-scan: " << n << (d == 2 ? " x " + std::to_string(n) : "") << " points on [" << fmt(lo) << ", " << fmt(hi)
            << "]" << (d == 2 ? "^2" : "") << "\n";
    return 0;
}

// --------------------------------------------------------------------------- solve / curves

int cmd_solve(Session& s) {
    const auto& sol = s.solution();
    s.artifact("solve.json", json{{"model", s.model().name}, {"p", num(s.problem().p)}, {"solution", solution_json(sol)}});
    s.out() << "solve " << s.model().name << " (p = " << fmt(s.problem().p) << ")\n";
    print_solution(s.out(), sol);
    return 0;
}

int cmd_curves(Session& s) {
    const auto curves = curves_for(s);
    const int n = s.options().points > 1 ? s.options().points : 101;
    const double T = s.problem().horizon;
    std::ostringstream csv;
    csv << "t,ell,kappa\n";
    for (int i = 0; i < n; ++i) {
        const double t = T * i / (n - 1);
        csv << cell(t) << "," << cell(curves.ell(t)) << "," << (curves.consumption() ? cell(curves.kappa(t)) : "") << "\n";
    }
    const double residual = verify_bellman_ode(curves, curves.g_star(), curves.p(), curves.consumption());
    s.artifact("curves.csv", csv.str());
    s.artifact("curves.json", json{{"g_star", num(curves.g_star())},
                                   {"a", num(curves.a())},
                                   {"consumption", curves.consumption()},
                                   {"ell_0", num(curves.ell(0.0))},
                                   {"kappa_0", curves.consumption() ? num(curves.kappa(0.0)) : json(nullptr)},
                                   {"value", num(curves.value())},
                                   {"ode_residual", num(residual)}});
    auto& os = s.out();
    os << "  a                   " << fmt(curves.a()) << "\n"
       << "  ell_0               " << fmt(curves.ell(0.0)) << "\n";
    if (curves.consumption()) os << "  kappa_0             " << fmt(curves.kappa(0.0)) << "\n";
    os << "  u(x0)               " << fmt(curves.value()) << "\n"
       << "  ODE residual        " << fmt(residual) << "\n";
    return 0;
}

// --------------------------------------------------------------------------- qmeasure

int cmd_qmeasure(Session& s) {
    const auto& sol = s.solution();
    QMeasureReport r;
    try {
        r = q_optimal_exists(s.triplet(), s.problem().p, sol, s.problem().constraints, s.problem().consumption, s.tol());
    } catch (const PreconditionFailed& e) {
        s.err() << "precondition failed: " << e.what() << "\n";
        return 2;
    }
    json j = {{"p", num(r.p)},
              {"q", num(r.q)},
              {"exists", r.exists},
              {"marginal", r.marginal},
              {"drift_residual", num(r.drift_residual)},
              {"threshold", num(r.threshold)},
              {"pi_hat", vec(r.pi_hat)},
              {"girsanov_continuous", vec(r.girsanov_continuous)},
              {"warnings", r.warnings}};
    auto& os = s.out();
    os << "  q                   " << fmt(r.q) << "\n"
       << "  exists              " << (r.exists ? "yes" : "no") << (r.marginal ? " (marginal)" : "") << "\n"
       << "  G(0, pi_hat)        " << fmt(r.drift_residual) << "\n"
       << "  girsanov continuous " << fmt(r.girsanov_continuous) << "\n";
    for (const auto& w : r.warnings) os << "  warning: " << w << "\n";
    if (r.triplet_under_Q) {
        try {
            const Vector res = martingale_residuals(*r.triplet_under_Q, s.tol());
            j["martingale_residuals"] = vec(res);
            os << "  martingale residual " << fmt(res) << "\n";
        } catch (const Error& e) {
            j["martingale_residuals"] = e.what();
            os << "  martingale residual " << e.what() << "\n";
        }
        j["triplet_under_Q"] = triplet_json(*r.triplet_under_Q);
        Model m = s.model();
        m.name = s.model().name + "_under_Q";
        m.triplet = *r.triplet_under_Q;
        try {
            s.artifact("qmeasure_model.toml", write_model(m));
        } catch (const DomainError& e) {
            s.err() << "warning: measure-changed model not written: " << e.what() << "\n";
        }
    }
    s.artifact("qmeasure.json", j);
    return 0;
}

// --------------------------------------------------------------------------- simulate

struct Policy {
    std::string label;
    Vector pi;
    ConsumptionPlan plan;
};

Policy resolve_policy(Session& s) {
    const auto& prob = s.problem();
    const auto d = s.triplet().dim();
    const std::string& kind = s.options().policy;
    if (kind == "optimal") {
        const auto curves = curves_for(s);
        return {"optimal", s.solution().pi_hat,
                prob.consumption ? ConsumptionPlan::from_curves(curves) : ConsumptionPlan::none()};
    }
    if (kind == "zero") {
        ConsumptionPlan plan;
        if (prob.consumption) plan = ConsumptionPlan::from_curves(build_curves(0.0, prob.p, true, prob.horizon, prob.x0));
        return {"zero", Vector::Zero(d), plan};
    }
    if (kind == "file") {
        if (s.options().policy_file.empty()) throw UsageError("--policy file needs --policy-file");
        std::ifstream in(s.options().policy_file);
        if (!in) throw UsageError("cannot open policy file '" + s.options().policy_file + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw UsageError(std::string("policy file: ") + e.what());
        }
        Policy p{"file", Vector::Zero(d), ConsumptionPlan::none()};
        if (!j.is_object() || !j.contains("pi")) throw UsageError("policy file: missing \"pi\"");
        const auto& pi = j.at("pi");
        if (!pi.is_number() && !(pi.is_array() && std::all_of(pi.begin(), pi.end(), [](const json& x) { return x.is_number(); }))) {
            throw UsageError("policy file: \"pi\" must be a number or an array of numbers");
        }
        if (j.contains("kappa") && !j.at("kappa").is_number()) throw UsageError("policy file: \"kappa\" must be a number");
        if (pi.is_number()) {
            if (d != 1) throw UsageError("policy file: pi must have " + std::to_string(d) + " entries");
            p.pi(0) = pi.get<double>();
        } else {
            if (pi.size() != static_cast<std::size_t>(d)) throw UsageError("policy file: pi must have " + std::to_string(d) + " entries");
            for (Eigen::Index i = 0; i < d; ++i) p.pi(i) = pi.at(i).get<double>();
        }
        if (j.contains("kappa")) {
            if (!prob.consumption) throw UsageError("policy file: kappa given but the model has no consumption");
            p.plan = ConsumptionPlan::constant(j.at("kappa").get<double>());
        } else if (prob.consumption) {
            throw UsageError("policy file: the model consumes, kappa is required");
        }
        return p;
    }
    throw UsageError("unknown policy '" + kind + "' (expected optimal, zero or file)");
}

int cmd_simulate(Session& s) {
    const auto& prob = s.problem();
    const auto& sim = s.model().simulation;
    const auto policy = resolve_policy(s);
    const auto batch = simulate_paths(s.triplet(), prob.horizon, sim.paths, sim.steps, sim.seed, s.tol());
    const auto est = expected_utility(batch, policy.pi, policy.plan, prob.p, prob.x0);
    double model_value = std::nan("");
    const auto& sol = s.solution();
    if (solved_finite(sol)) model_value = build_curves(sol.g_star, prob.p, prob.consumption, prob.horizon, prob.x0).value();

    std::ostringstream csv;
    csv << "policy,pi,mean,standard_error,n_paths,absorbed,model_value\n";
    std::string pi_cell;
    for (Eigen::Index i = 0; i < policy.pi.size(); ++i) pi_cell += (i ? ";" : "") + cell(policy.pi(i));
    csv << policy.label << "," << pi_cell << "," << cell(est.mean) << "," << cell(est.standard_error) << "," << est.n_paths
        << "," << est.absorbed << "," << cell(model_value) << "\n";
    s.artifact("simulate.csv", csv.str());
    s.artifact("simulate.json", json{{"policy", policy.label},
                                     {"pi", vec(policy.pi)},
                                     {"mean", num(est.mean)},
                                     {"standard_error", num(est.standard_error)},
                                     {"n_paths", est.n_paths},
                                     {"absorbed", est.absorbed},
                                     {"model_value", num(model_value)}});
    s.out() << "  policy              " << policy.label << " " << fmt(policy.pi) << "\n"
            << "  E[U]                " << fmt(est.mean) << " +- " << fmt(est.standard_error) << "\n"
            << "  paths               " << est.n_paths << " (absorbed " << est.absorbed << ")\n"
            << "  model value u(x0)   " << fmt(model_value) << "\n";
    return 0;
}

// --------------------------------------------------------------------------- verify

bool within_se(const UtilityEstimate& e, double target, double sigmas) {
    const double gap = std::abs(e.mean - target);
    if (e.standard_error == 0.0) return gap <= 1e-12 * (1.0 + std::abs(target));
    return gap <= sigmas * e.standard_error;
}

int cmd_verify(Session& s) {
    const auto& t = s.triplet();
    const auto& prob = s.problem();
    const auto& C = prob.constraints;
    std::vector<Check> checks;
    auto add = [&](std::string name, bool ok, std::string detail) {
        checks.push_back({std::move(name), ok ? "PASS" : "FAIL", std::move(detail)});
    };
    auto skip = [&](std::string name, std::string detail) { checks.push_back({std::move(name), "SKIP", std::move(detail)}); };

    const auto report = validate_model(t, prob.tol);
    add("model valid", report.valid(), std::to_string(report.violations.size()) + " violations");

    const auto nuip = nuip_check(t, C, prob.tol);
    add("nuip", nuip.status != NuipStatus::violated, to_string(nuip.status));

    const auto& sol = s.solution();
    const bool finite = solved_finite(sol);
    add("finite optimum", finite, "finiteness " + to_string(sol.finiteness) + ", g* " + fmt(sol.g_star));
    if (finite && !sol.maximizer_attained) skip("first-order optimality", "supremum not attained");

    std::optional<SolutionCurves> curves;
    if (finite) curves = build_curves(sol.g_star, prob.p, prob.consumption, prob.horizon, prob.x0);

    if (finite && sol.maximizer_attained) {
        const Objective obj(t, prob.p, prob.tol);
        add("value at pi_hat", std::abs(obj.value(sol.pi_hat).value - sol.g_star) <= 1e-8 * (1.0 + std::abs(sol.g_star)),
            "g(pi_hat) = " + fmt(obj.value(sol.pi_hat).value));
        if (C.convex()) {
            double worst = -kInf;
            for (const auto& y : perturbation_panel(sol.pi_hat, C, t, 20, 1.0)) {
                worst = std::max(worst, obj.directional(y, sol.pi_hat));
            }
            worst = std::max(worst, obj.directional(Vector::Zero(t.dim()), sol.pi_hat));
            add("first-order optimality", worst <= 1e-6, "max G(y, pi_hat) = " + fmt(worst));
        } else {
            skip("first-order optimality", "non-convex constraints");
        }
    }
    if (curves) {
        const double r = verify_bellman_ode(*curves, sol.g_star, prob.p, prob.consumption);
        add("opportunity process ODE", r < 1e-8, "max deviation " + fmt(r));
    }

    const bool q_applicable = finite && sol.maximizer_attained && !prob.consumption && C.unconstrained_set();
    std::optional<QMeasureReport> q;
    if (q_applicable) {
        q = q_optimal_exists(t, prob.p, sol, C, prob.consumption, prob.tol);
        add("q-measure consistency", !q->exists || sol.location == Location::interior,
            std::string("exists ") + (q->exists ? "yes" : "no") + ", location " + to_string(sol.location));
        if (q->exists) {
            try {
                const Vector res = martingale_residuals(*q->triplet_under_Q, prob.tol);
                add("martingale residuals", res.cwiseAbs().maxCoeff() <= 1e-7, fmt(res));
            } catch (const Error& e) {
                skip("martingale residuals", e.what());
            }
        }
    } else {
        skip("q-measure", "needs an attained optimum, no consumption and C = R^d");
    }

    const auto& sim = s.model().simulation;
    std::optional<PathBatch> batch;
    if (finite && sol.maximizer_attained) {
        try {
            batch = simulate_paths(t, prob.horizon, sim.paths, sim.steps, sim.seed, prob.tol);
        } catch (const InfiniteActivity& e) {
            skip("monte carlo", e.what());
        }
    } else {
        skip("monte carlo", "no maximizer to simulate");
    }
    if (batch) {
        const auto plan = prob.consumption ? ConsumptionPlan::from_curves(*curves) : ConsumptionPlan::none();
        const auto best = expected_utility(*batch, sol.pi_hat, plan, prob.p, prob.x0);
        add("expected utility", within_se(best, curves->value(), 3.0),
            fmt(best.mean) + " +- " + fmt(best.standard_error) + " vs " + fmt(curves->value()));
        int worse = 0;
        int total = 0;
        for (const auto& y : perturbation_panel(sol.pi_hat, C, t, 20, 0.1)) {
            const auto e = expected_utility(*batch, y, plan, prob.p, prob.x0);
            ++total;
            if (e.mean <= best.mean + 2.0 * std::max(e.standard_error, best.standard_error)) ++worse;
        }
        add("optimality dominance", worse == total, std::to_string(worse) + "/" + std::to_string(total) + " perturbations dominated");
        const auto v = verification_test(*batch, sol.pi_hat, *curves, 3.0, prob.tol);
        add("gamma martingale", v.gamma_pass,
            fmt(v.gamma_end.mean) + " +- " + fmt(v.gamma_end.standard_error) + " vs " + fmt(v.gamma_start));
        add("psi exponential", v.psi_pass, fmt(v.psi_end.mean) + " +- " + fmt(v.psi_end.standard_error) + " vs 1");
        if (q && q->exists) {
            const auto z = sample_mean(exponential_martingale_terminal(*batch, sol.pi_hat, prob.p - 1.0, prob.tol));
            add("q density unit mass", within_se(z, 1.0, 3.0), fmt(z.mean) + " +- " + fmt(z.standard_error));
        }
    }

    json list = json::array();
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.status != "FAIL";
        list.push_back({{"check", c.name}, {"status", c.status}, {"detail", c.detail}});
        s.out() << c.status << "  " << c.name << ": " << c.detail << "\n";
    }
    s.artifact("verify.json", json{{"model", s.model().name}, {"passed", ok}, {"checks", list},
                                   {"solution", solution_json(sol)}});
    s.out() << (ok ? "verify: all checks passed" : "verify: some checks failed") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal power-utility portfolios in constrained exponential Levy markets"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", LEVYOPT_VERSION);

    Options opt;
    const char* env_out = std::getenv("LEVYOPT_OUT");
    opt.out_dir = env_out && *env_out ? env_out : "levyopt_out";
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    int grid = 0;
    double lo = 0.0;
    double hi = 0.0;
    double qtol = 0.0;
    double otol = 0.0;
    double dtol = 0.0;
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the model file)");
    auto* paths_opt = app.add_option("--paths", paths, "number of simulated paths")->check(CLI::PositiveNumber);
    auto* grid_opt = app.add_option("--grid", grid, "time steps per path")->check(CLI::PositiveNumber);
    app.add_option("--out", opt.out_dir, "output directory (default $LEVYOPT_OUT or ./levyopt_out)");
    app.add_option("--policy", opt.policy, "simulate: optimal, zero or file")
        ->check(CLI::IsMember({"optimal", "zero", "file"}));
    app.add_option("--policy-file", opt.policy_file, "JSON with \"pi\" and optional constant \"kappa\"");
    app.add_option("--points", opt.points, "grid points for g-scan and curves");
    auto* lo_opt = app.add_option("--lo", lo, "g-scan lower coordinate bound");
    auto* hi_opt = app.add_option("--hi", hi, "g-scan upper coordinate bound");
    auto* qtol_opt = app.add_option("--quadrature-tol", qtol, "relative quadrature tolerance");
    auto* otol_opt = app.add_option("--optimizer-tol", otol, "optimizer tolerance");
    auto* dtol_opt = app.add_option("--drift-tol", dtol, "q-measure drift threshold");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"validate", "check the structural conditions of the triplet"},
        {"geometry", "natural constraints, null investments, recession cone, NUIP"},
        {"nuip", "decide absence of unbounded increasing profit"},
        {"transform", "positive-asset transformation and invariance diagnostics"},
        {"g-scan", "CSV of g and G(0, y) on a grid (d <= 2)"},
        {"solve", "optimal portfolio and value"},
        {"curves", "opportunity process and consumption propensity"},
        {"qmeasure", "existence of the dual martingale measure"},
        {"simulate", "Monte Carlo expected utility of a policy"},
        {"verify", "full pipeline with acceptance checks"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("model", opt.model_path, "model file")->required();
        sub->callback([&opt, n = name] { opt.command = n; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }
    if (seed_opt->count()) opt.seed = seed;
    if (paths_opt->count()) opt.paths = paths;
    if (grid_opt->count()) opt.grid = grid;
    if (lo_opt->count()) opt.lo = lo;
    if (hi_opt->count()) opt.hi = hi;
    if (qtol_opt->count()) opt.quadrature_tol = qtol;
    if (otol_opt->count()) opt.optimizer_tol = otol;
    if (dtol_opt->count()) opt.drift_tol = dtol;

    try {
        Session session(opt, out, err);
        int code = 0;
        const auto& c = opt.command;
        if (c == "validate") code = cmd_validate(session);
        else if (c == "geometry") code = cmd_geometry(session);
        else if (c == "nuip") code = cmd_nuip(session);
        else if (c == "transform") code = cmd_transform(session);
        else if (c == "g-scan") code = cmd_gscan(session);
        else if (c == "solve") code = cmd_solve(session);
        else if (c == "curves") code = cmd_curves(session);
        else if (c == "qmeasure") code = cmd_qmeasure(session);
        else if (c == "simulate") code = cmd_simulate(session);
        else if (c == "verify") code = cmd_verify(session);
        if (code != 2) session.flush();
        return code;
    } catch (const ParseError& e) {
        err << opt.model_path << ": " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace levyopt::cli
