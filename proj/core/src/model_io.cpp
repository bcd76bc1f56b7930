#include "levyopt/model_io.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace levyopt {

namespace {

std::size_t line_of(const toml::node& node) { return node.source().begin.line; }

[[noreturn]] void fail(const std::string& field, const toml::node& node, const std::string& message) {
    throw ParseError(field, line_of(node), message);
}

void reject_unknown(const toml::table& table, const std::string& prefix, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, node] : table) {
        if (!keys.count(std::string(key.str()))) {
            throw ParseError(prefix.empty() ? std::string(key.str()) : prefix + "." + std::string(key.str()),
                             key.source().begin.line, "unknown key");
        }
    }
}

double as_number(const toml::node& node, const std::string& field) {
    if (const auto* f = node.as_floating_point()) return f->get();
    if (const auto* i = node.as_integer()) return static_cast<double>(i->get());
    fail(field, node, "expected a number");
}

const toml::node* find(const toml::table& table, const char* key) { return table.get(key); }

double number_or(const toml::table& table, const char* key, const std::string& prefix, double fallback) {
    const auto* node = find(table, key);
    return node ? as_number(*node, prefix + "." + key) : fallback;
}

double required_number(const toml::table& table, const char* key, const std::string& prefix) {
    const auto* node = find(table, key);
    if (!node) fail(prefix + "." + key, table, "missing required key");
    return as_number(*node, prefix + "." + key);
}

std::int64_t integer_or(const toml::table& table, const char* key, const std::string& prefix, std::int64_t fallback) {
    const auto* node = find(table, key);
    if (!node) return fallback;
    if (const auto* i = node->as_integer()) return i->get();
    fail(prefix + "." + key, *node, "expected an integer");
}

std::string required_string(const toml::table& table, const char* key, const std::string& prefix) {
    const auto* node = find(table, key);
    if (!node) fail(prefix + "." + key, table, "missing required key");
    if (const auto* s = node->as_string()) return s->get();
    fail(prefix + "." + key, *node, "expected a string");
}

/// A number is accepted as a vector of length one.
Vector as_vector(const toml::node& node, const std::string& field) {
    if (const auto* arr = node.as_array()) {
        Vector v(static_cast<Eigen::Index>(arr->size()));
        for (std::size_t i = 0; i < arr->size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = as_number(*arr->get(i), field + "[" + std::to_string(i) + "]");
        }
        return v;
    }
    Vector v(1);
    v(0) = as_number(node, field);
    return v;
}

Vector vector_of_size(const toml::node& node, const std::string& field, Eigen::Index d) {
    Vector v = as_vector(node, field);
    if (v.size() != d) {
        fail(field, node, "expected " + std::to_string(d) + " entries, got " + std::to_string(v.size()));
    }
    return v;
}

/// Rows as arrays; a number is accepted as a 1 x 1 matrix.
Matrix as_matrix(const toml::node& node, const std::string& field, Eigen::Index cols) {
    const auto* arr = node.as_array();
    if (!arr) {
        if (cols != 1) fail(field, node, "expected an array of rows");
        Matrix m(1, 1);
        m(0, 0) = as_number(node, field);
        return m;
    }
    Matrix m(static_cast<Eigen::Index>(arr->size()), cols);
    for (std::size_t r = 0; r < arr->size(); ++r) {
        const std::string row_field = field + "[" + std::to_string(r) + "]";
        const auto row = vector_of_size(*arr->get(r), row_field, cols);
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

const toml::table& as_table(const toml::node& node, const std::string& field) {
    if (const auto* t = node.as_table()) return *t;
    fail(field, node, "expected a table");
}

std::vector<const toml::table*> table_array(const toml::table& root, const char* key) {
    std::vector<const toml::table*> out;
    const auto* node = find(root, key);
    if (!node) return out;
    const auto* arr = node->as_array();
    if (!arr) fail(key, *node, "expected an array of tables");
    for (std::size_t i = 0; i < arr->size(); ++i) {
        out.push_back(&as_table(*arr->get(i), std::string(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
}

DensityPart parse_density(const toml::table& t, const std::string& prefix, Eigen::Index d) {
    reject_unknown(t, prefix,
                   {"kind", "direction", "support", "intensity", "alpha", "scale", "rate", "mean", "stddev", "tail",
                    "tilts", "grid"});
    const std::string kind = required_string(t, "kind", prefix);
    Vector direction;
    if (const auto* node = find(t, "direction")) {
        direction = vector_of_size(*node, prefix + ".direction", d);
    } else if (d == 1) {
        direction = Vector::Ones(1);
    } else {
        fail(prefix + ".direction", t, "missing required key (needed when the model has more than one asset)");
    }
    double lo = -kInf;
    double hi = kInf;
    if (const auto* node = find(t, "support")) {
        const Vector s = vector_of_size(*node, prefix + ".support", 2);
        lo = s(0);
        hi = s(1);
        if (!(lo < hi)) fail(prefix + ".support", *node, "support must satisfy lo < hi");
    } else if (kind != "gaussian") {
        fail(prefix + ".support", t, "missing required key");
    }
    DensityPart part;
    try {
        if (kind == "uniform") {
            part = make_uniform(direction, lo, hi, required_number(t, "intensity", prefix));
        } else if (kind == "pareto") {
            part = make_pareto(direction, required_number(t, "alpha", prefix), number_or(t, "scale", prefix, 1.0), lo, hi);
        } else if (kind == "exponential") {
            part = make_exponential(direction, required_number(t, "intensity", prefix), required_number(t, "rate", prefix),
                                    lo, hi);
        } else if (kind == "gaussian") {
            part = make_gaussian(direction, required_number(t, "intensity", prefix), number_or(t, "mean", prefix, 0.0),
                                 required_number(t, "stddev", prefix), lo, hi);
        } else {
            fail(prefix + ".kind", *find(t, "kind"),
                 "unknown density kind '" + kind + "' (expected uniform, pareto, exponential or gaussian)");
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        fail(prefix, t, e.what());
    }
    if (const auto* node = find(t, "tail")) {
        const auto& tail = as_table(*node, prefix + ".tail");
        reject_unknown(tail, prefix + ".tail", {"kind", "rate"});
        const std::string tk = required_string(tail, "kind", prefix + ".tail");
        TailModel model;
        if (tk == "power") {
            model.kind = TailKind::power;
        } else if (tk == "exponential") {
            model.kind = TailKind::exponential;
        } else {
            fail(prefix + ".tail.kind", tail, "expected 'power' or 'exponential'");
        }
        model.rate = required_number(tail, "rate", prefix + ".tail");
        part.tail_override = model;
    }
    if (const auto* node = find(t, "tilts")) {
        const auto* arr = node->as_array();
        if (!arr) fail(prefix + ".tilts", *node, "expected an array of tables");
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string f = prefix + ".tilts[" + std::to_string(i) + "]";
            const auto& tilt = as_table(*arr->get(i), f);
            reject_unknown(tilt, f, {"slope", "power"});
            part.tilts.push_back({required_number(tilt, "slope", f), required_number(tilt, "power", f)});
        }
    }
    if (const auto* node = find(t, "grid")) {
        const auto& grid = as_table(*node, prefix + ".grid");
        reject_unknown(grid, prefix + ".grid", {"intervals", "depth"});
        part.grid.initial_intervals = static_cast<int>(integer_or(grid, "intervals", prefix + ".grid", 4));
        part.grid.max_depth = static_cast<int>(integer_or(grid, "depth", prefix + ".grid", 15));
        if (part.grid.initial_intervals < 1 || part.grid.max_depth < 1) {
            fail(prefix + ".grid", grid, "grid entries must be positive");
        }
    }
    return part;
}

ConvexPiece parse_general_piece(const toml::table& t, const std::string& prefix, Eigen::Index d) {
    ConvexPiece piece;
    for (const auto* row : table_array(t, "linear")) {
        const std::string f = prefix + ".linear";
        reject_unknown(*row, f, {"a", "bound"});
        const auto* a = find(*row, "a");
        if (!a) fail(f + ".a", *row, "missing required key");
        piece.linear.push_back({vector_of_size(*a, f + ".a", d), required_number(*row, "bound", f)});
    }
    for (const auto* row : table_array(t, "norm")) {
        const std::string f = prefix + ".norm";
        reject_unknown(*row, f, {"P", "center", "slope", "radius"});
        const auto* P = find(*row, "P");
        if (!P) fail(f + ".P", *row, "missing required key");
        NormIneq n;
        n.P = as_matrix(*P, f + ".P", d);
        n.center = Vector::Zero(n.P.rows());
        n.slope = Vector::Zero(d);
        if (const auto* c = find(*row, "center")) n.center = vector_of_size(*c, f + ".center", n.P.rows());
        if (const auto* s = find(*row, "slope")) n.slope = vector_of_size(*s, f + ".slope", d);
        n.radius = number_or(*row, "radius", f, 0.0);
        piece.norms.push_back(std::move(n));
    }
    piece.bounded = false;
    return piece;
}

ConstraintSet parse_constraint(const toml::table& t, const std::string& prefix, Eigen::Index d, bool allow_union) {
    const std::string kind = required_string(t, "kind", prefix);
    // union pieces only need the union as a whole to contain 0
    const auto check = allow_union ? OriginCheck::require : OriginCheck::skip;
    auto need = [&](const char* key) -> const toml::node& {
        const auto* node = find(t, key);
        if (!node) fail(prefix + "." + key, t, "missing required key for kind '" + kind + "'");
        return *node;
    };
    try {
        if (kind == "none") {
            reject_unknown(t, prefix, {"kind"});
            return ConstraintSet::unconstrained(d);
        }
        if (kind == "polyhedron") {
            reject_unknown(t, prefix, {"kind", "A", "upper"});
            const Matrix A = as_matrix(need("A"), prefix + ".A", d);
            return ConstraintSet::polyhedron(A, vector_of_size(need("upper"), prefix + ".upper", A.rows()), check);
        }
        if (kind == "box") {
            reject_unknown(t, prefix, {"kind", "lower", "upper"});
            return ConstraintSet::box(vector_of_size(need("lower"), prefix + ".lower", d),
                                      vector_of_size(need("upper"), prefix + ".upper", d), check);
        }
        if (kind == "ball") {
            reject_unknown(t, prefix, {"kind", "center", "radius"});
            Vector center = Vector::Zero(d);
            if (const auto* c = find(t, "center")) center = vector_of_size(*c, prefix + ".center", d);
            return ConstraintSet::ball(center, as_number(need("radius"), prefix + ".radius"), check);
        }
        if (kind == "hull") {
            reject_unknown(t, prefix, {"kind", "points"});
            const Matrix pts = as_matrix(need("points"), prefix + ".points", d);
            std::vector<Vector> points;
            for (Eigen::Index r = 0; r < pts.rows(); ++r) points.push_back(pts.row(r).transpose());
            return ConstraintSet::hull(points, check);
        }
        if (kind == "cone") {
            reject_unknown(t, prefix, {"kind", "P", "slope"});
            return ConstraintSet::cone(as_matrix(need("P"), prefix + ".P", d),
                                       vector_of_size(need("slope"), prefix + ".slope", d));
        }
        if (kind == "general") {
            reject_unknown(t, prefix, {"kind", "linear", "norm"});
            auto piece = parse_general_piece(t, prefix, d);
            const auto kind_tag = piece.polyhedral() ? ConstraintKind::polyhedron : ConstraintKind::cone;
            auto set = ConstraintSet::from_pieces(d, {std::move(piece)}, kind_tag);
            if (allow_union && !set.contains(Vector::Zero(d), 1e-12)) fail(prefix, t, "constraint set must contain the origin");
            return set;
        }
        if (kind == "union" && allow_union) {
            reject_unknown(t, prefix, {"kind", "piece"});
            std::vector<ConstraintSet> parts;
            const auto pieces = table_array(t, "piece");
            if (pieces.empty()) fail(prefix + ".piece", t, "a union needs at least one piece");
            for (std::size_t i = 0; i < pieces.size(); ++i) {
                parts.push_back(parse_constraint(*pieces[i], prefix + ".piece[" + std::to_string(i) + "]", d, false));
            }
            return ConstraintSet::union_of(parts);
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        fail(prefix, t, e.what());
    }
    fail(prefix + ".kind", *find(t, "kind"),
         "unknown constraint kind '" + kind + "' (expected none, polyhedron, box, ball, hull, cone, general" +
             (allow_union ? ", union)" : ")"));
}

Model build(const toml::table& root) {
    reject_unknown(root, "", {"schema", "name", "triplet", "atom", "density", "problem", "constraints", "simulation"});
    Model model;
    const auto schema = integer_or(root, "schema", "", kModelSchemaVersion);
    if (schema != kModelSchemaVersion) {
        fail("schema", *find(root, "schema"), "unsupported schema version " + std::to_string(schema));
    }
    if (const auto* node = find(root, "name")) {
        const auto* s = node->as_string();
        if (!s) fail("name", *node, "expected a string");
        model.name = s->get();
    }

    const auto* triplet_node = find(root, "triplet");
    if (!triplet_node) throw ParseError("triplet", 1, "missing [triplet] table");
    const auto& tt = as_table(*triplet_node, "triplet");
    reject_unknown(tt, "triplet", {"b", "c"});
    const auto* b_node = find(tt, "b");
    if (!b_node) fail("triplet.b", tt, "missing required key");
    const Vector b = as_vector(*b_node, "triplet.b");
    const Eigen::Index d = b.size();
    if (d == 0) fail("triplet.b", *b_node, "drift must have at least one entry");
    Matrix c = Matrix::Zero(d, d);
    if (const auto* c_node = find(tt, "c")) {
        c = as_matrix(*c_node, "triplet.c", d);
        if (c.rows() != d) fail("triplet.c", *c_node, "covariance must be " + std::to_string(d) + " x " + std::to_string(d));
    }

    JumpMeasure jumps;
    const auto atoms = table_array(root, "atom");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const std::string f = "atom[" + std::to_string(i) + "]";
        reject_unknown(*atoms[i], f, {"x", "lambda"});
        const auto* x = find(*atoms[i], "x");
        if (!x) fail(f + ".x", *atoms[i], "missing required key");
        jumps.atoms.push_back({vector_of_size(*x, f + ".x", d), required_number(*atoms[i], "lambda", f)});
    }
    const auto densities = table_array(root, "density");
    for (std::size_t i = 0; i < densities.size(); ++i) {
        jumps.densities.push_back(parse_density(*densities[i], "density[" + std::to_string(i) + "]", d));
    }
    model.triplet = LevyTriplet(b, c, std::move(jumps));

    auto& problem = model.problem;
    problem.constraints = ConstraintSet::unconstrained(d);
    if (const auto* node = find(root, "problem")) {
        const auto& pt = as_table(*node, "problem");
        reject_unknown(pt, "problem", {"p", "delta", "T", "x0", "tolerances"});
        problem.p = required_number(pt, "p", "problem");
        if (problem.p == 0.0 || problem.p >= 1.0) fail("problem.p", *find(pt, "p"), "p must lie in (-inf, 1) without 0");
        if (const auto* delta = find(pt, "delta")) {
            if (const auto* flag = delta->as_boolean()) {
                problem.consumption = flag->get();
            } else {
                const double v = as_number(*delta, "problem.delta");
                if (v != 0.0 && v != 1.0) fail("problem.delta", *delta, "delta must be 0 or 1");
                problem.consumption = v == 1.0;
            }
        }
        problem.horizon = number_or(pt, "T", "problem", 1.0);
        if (!(problem.horizon > 0.0) || !std::isfinite(problem.horizon)) {
            fail("problem.T", *find(pt, "T"), "horizon must be positive and finite");
        }
        problem.x0 = number_or(pt, "x0", "problem", 1.0);
        if (!(problem.x0 > 0.0)) fail("problem.x0", *find(pt, "x0"), "initial wealth must be positive");
        if (const auto* tol_node = find(pt, "tolerances")) {
            const auto& tol = as_table(*tol_node, "problem.tolerances");
            const std::string f = "problem.tolerances";
            reject_unknown(tol, f, {"psd", "quadrature", "quadrature_fail", "optimizer", "geometry", "drift"});
            problem.tol.psd = number_or(tol, "psd", f, problem.tol.psd);
            problem.tol.quadrature = number_or(tol, "quadrature", f, problem.tol.quadrature);
            problem.tol.quadrature_fail = number_or(tol, "quadrature_fail", f, problem.tol.quadrature_fail);
            problem.tol.optimizer = number_or(tol, "optimizer", f, problem.tol.optimizer);
            problem.tol.geometry = number_or(tol, "geometry", f, problem.tol.geometry);
            problem.tol.drift = number_or(tol, "drift", f, problem.tol.drift);
        }
    } else {
        throw ParseError("problem", 1, "missing [problem] table");
    }
    if (const auto* node = find(root, "constraints")) {
        problem.constraints = parse_constraint(as_table(*node, "constraints"), "constraints", d, true);
    }
    if (const auto* node = find(root, "simulation")) {
        const auto& st = as_table(*node, "simulation");
        reject_unknown(st, "simulation", {"paths", "grid", "seed"});
        const auto paths = integer_or(st, "paths", "simulation", 10000);
        const auto grid = integer_or(st, "grid", "simulation", 50);
        const auto seed = integer_or(st, "seed", "simulation", 1);
        if (paths < 1) fail("simulation.paths", *find(st, "paths"), "must be positive");
        if (grid < 1) fail("simulation.grid", *find(st, "grid"), "must be positive");
        if (seed < 0) fail("simulation.seed", *find(st, "seed"), "must be nonnegative");
        model.simulation = {static_cast<std::size_t>(paths), static_cast<int>(grid), static_cast<std::uint64_t>(seed)};
    }
    return model;
}

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string vec(const Vector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v(i));
    return out + "]";
}

std::string mat(const Matrix& m) {
    std::string out = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) out += (r ? ", " : "") + vec(m.row(r).transpose());
    return out + "]";
}

void write_piece(std::ostringstream& os, const ConvexPiece& piece, const std::string& prefix) {
    os << "kind = \"general\"\n";
    for (const auto& l : piece.linear) {
        os << "\n[[" << prefix << ".linear]]\na = " << vec(l.a) << "\nbound = " << num(l.bound) << "\n";
    }
    for (const auto& n : piece.norms) {
        os << "\n[[" << prefix << ".norm]]\nP = " << mat(n.P) << "\ncenter = " << vec(n.center)
           << "\nslope = " << vec(n.slope) << "\nradius = " << num(n.radius) << "\n";
    }
}

}  // namespace

Model parse_model(std::string_view text, std::string_view source_name) {
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
        throw ParseError("", e.source().begin.line, std::string(e.description()));
    }
    return build(root);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str(), path.string());
}

std::string write_model(const Model& model) {
    std::ostringstream os;
    const auto& t = model.triplet;
    os << "schema = " << kModelSchemaVersion << "\n";
    if (!model.name.empty()) os << "name = \"" << model.name << "\"\n";
    os << "\n[triplet]\nb = " << vec(t.b) << "\nc = " << mat(t.c) << "\n";
    for (const auto& atom : t.jumps.atoms) {
        os << "\n[[atom]]\nx = " << vec(atom.x) << "\nlambda = " << num(atom.lambda) << "\n";
    }
    for (const auto& part : t.jumps.densities) {
        os << "\n[[density]]\nkind = \"" << part.kind_name() << "\"\ndirection = " << vec(part.direction)
           << "\nsupport = [" << num(part.lo) << ", " << num(part.hi) << "]\n";
        if (const auto* u = std::get_if<UniformProfile>(&part.profile)) {
            os << "intensity = " << num(u->intensity) << "\n";
        } else if (const auto* pa = std::get_if<ParetoProfile>(&part.profile)) {
            os << "alpha = " << num(pa->alpha) << "\nscale = " << num(pa->scale) << "\n";
        } else if (const auto* ex = std::get_if<ExponentialProfile>(&part.profile)) {
            os << "intensity = " << num(ex->intensity) << "\nrate = " << num(ex->rate) << "\n";
        } else if (const auto* ga = std::get_if<GaussianProfile>(&part.profile)) {
            os << "intensity = " << num(ga->intensity) << "\nmean = " << num(ga->mean) << "\nstddev = "
               << num(ga->stddev) << "\n";
        } else {
            throw DomainError("custom densities cannot be written to a model file");
        }
        if (part.tail_override) {
            os << "tail = { kind = \"" << (part.tail_override->kind == TailKind::power ? "power" : "exponential")
               << "\", rate = " << num(part.tail_override->rate) << " }\n";
        }
        if (!part.tilts.empty()) {
            os << "tilts = [";
            for (std::size_t i = 0; i < part.tilts.size(); ++i) {
                os << (i ? ", " : "") << "{ slope = " << num(part.tilts[i].slope) << ", power = "
                   << num(part.tilts[i].power) << " }";
            }
            os << "]\n";
        }
        os << "grid = { intervals = " << part.grid.initial_intervals << ", depth = " << part.grid.max_depth << " }\n";
    }
    const auto& pr = model.problem;
    os << "\n[problem]\np = " << num(pr.p) << "\ndelta = " << (pr.consumption ? 1 : 0) << "\nT = " << num(pr.horizon)
       << "\nx0 = " << num(pr.x0) << "\n";
    os << "\n[problem.tolerances]\npsd = " << num(pr.tol.psd) << "\nquadrature = " << num(pr.tol.quadrature)
       << "\nquadrature_fail = " << num(pr.tol.quadrature_fail) << "\noptimizer = " << num(pr.tol.optimizer)
       << "\ngeometry = " << num(pr.tol.geometry) << "\ndrift = " << num(pr.tol.drift) << "\n";
    const auto& C = pr.constraints;
    if (C.is_oracle()) throw DomainError("oracle constraints cannot be written to a model file");
    os << "\n[constraints]\n";
    if (C.unconstrained_set()) {
        os << "kind = \"none\"\n";
    } else if (C.pieces().size() == 1) {
        write_piece(os, C.pieces().front(), "constraints");
    } else {
        os << "kind = \"union\"\n";
        for (const auto& piece : C.pieces()) {
            os << "\n[[constraints.piece]]\n";
            write_piece(os, piece, "constraints.piece");
        }
    }
    const auto& sim = model.simulation;
    os << "\n[simulation]\npaths = " << sim.paths << "\ngrid = " << sim.steps << "\nseed = " << sim.seed << "\n";
    return os.str();
}

}  // namespace levyopt
