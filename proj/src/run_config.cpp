#include "riccati/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace riccati {

using nlohmann::json;

namespace {

// Typed access to one JSON object that remembers which keys were read, so
// anything left over can be reported as unknown.
class Section {
public:
    Section(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) {
            throw ConfigError(where_ + " must be an object");
        }
    }

    bool has(const char* key) const { return obj_.contains(key); }

    const json* raw(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    bool number(const char* key, double& out) {
        const json* v = raw(key);
        if (!v) {
            return false;
        }
        if (!v->is_number()) {
            throw ConfigError(path(key) + " must be a number");
        }
        out = v->get<double>();
        if (!std::isfinite(out)) {
            throw ConfigError(path(key) + " must be finite");
        }
        return true;
    }

    template <class Int>
    bool integer(const char* key, Int& out) {
        const json* v = raw(key);
        if (!v) {
            return false;
        }
        if (v->is_number_integer()) {
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->is_number_unsigned()) {
                    out = v->get<Int>();
                    return true;
                }
                if (v->get<long long>() < 0) {
                    throw ConfigError(path(key) + " must be non-negative");
                }
            }
            out = static_cast<Int>(v->get<long long>());
            return true;
        }
        if (v->is_number_float()) {
            const double d = v->get<double>();
            if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) {
                if (std::is_unsigned_v<Int> && d < 0) {
                    throw ConfigError(path(key) + " must be non-negative");
                }
                out = static_cast<Int>(d);
                return true;
            }
        }
        throw ConfigError(path(key) + " must be an integer");
    }

    bool boolean(const char* key, bool& out) {
        const json* v = raw(key);
        if (!v) {
            return false;
        }
        if (!v->is_boolean()) {
            throw ConfigError(path(key) + " must be true or false");
        }
        out = v->get<bool>();
        return true;
    }

    bool string(const char* key, std::string& out) {
        const json* v = raw(key);
        if (!v) {
            return false;
        }
        if (!v->is_string()) {
            throw ConfigError(path(key) + " must be a string");
        }
        out = v->get<std::string>();
        return true;
    }

    bool numbers(const char* key, std::vector<double>& out) {
        const json* v = raw(key);
        if (!v) {
            return false;
        }
        out = number_array(*v, path(key));
        return true;
    }

    bool matrix(const char* key, std::optional<Eigen::MatrixXd>& out) {
        const json* v = raw(key);
        if (!v) {
            return false;
        }
        if (!v->is_array() || v->empty()) {
            throw ConfigError(path(key) + " must be a non-empty array of rows");
        }
        std::vector<std::vector<double>> rows;
        for (const json& row : *v) {
            rows.push_back(number_array(row, path(key)));
            if (rows.back().size() != rows.front().size() || rows.back().empty()) {
                throw ConfigError(path(key) + " rows must be non-empty and of equal length");
            }
        }
        Eigen::MatrixXd m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        out = std::move(m);
        return true;
    }

    /// Throws on any key that was never read.
    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError("unknown key " + path(it.key().c_str()));
            }
        }
    }

    std::string path(const char* key) const {
        return where_.empty() ? std::string("'") + key + "'" : "'" + where_ + "." + key + "'";
    }

private:
    static std::vector<double> number_array(const json& v, const std::string& where) {
        if (!v.is_array()) {
            throw ConfigError(where + " must be an array of numbers");
        }
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                throw ConfigError(where + " must contain finite numbers only");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

// Parameters each family reads.
const std::map<std::string, std::vector<std::string>>& family_params() {
    static const std::map<std::string, std::vector<std::string>> params{
        {"gaussian", {"amplitude", "width", "center"}},
        {"sech", {"amplitude", "width", "center"}},
        {"single_mode", {"value", "k0"}},
        {"sech_product", {"amplitude"}},
        {"gaussian2d", {"amplitude", "width", "center"}},
        {"one_plus_gaussian", {"epsilon", "width"}},
        {"constant", {"value"}},
        {"csv", {"path"}},
    };
    return params;
}

const std::map<std::string, std::vector<std::string>>& coupling_params() {
    static const std::map<std::string, std::vector<std::string>> params{
        {"one", {}},
        {"zero", {}},
        {"constant", {"value"}},
        {"gaussian_density", {"sigma", "mean"}},
    };
    return params;
}

std::vector<std::string> allowed_families(ModelKind kind, bool q0) {
    switch (kind) {
        case ModelKind::Conv:
            return {"gaussian", "sech", "single_mode", "csv"};
        case ModelKind::Corr:
            return {"sech_product", "gaussian2d", "csv"};
        case ModelKind::Burgers:
            if (q0) {
                return {"one_plus_gaussian", "constant", "csv"};
            }
            return {};
        case ModelKind::Matrix:
            return {};
    }
    return {};
}

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        out += (out.empty() ? "" : ", ") + n;
    }
    return out;
}

bool contains(const std::vector<std::string>& names, const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
}

void parse_profile(const json& j, const char* where, ModelKind kind, ProfileSpec& spec) {
    Section s(j, where);
    std::string family = spec.family;
    s.string("family", family);
    const bool q0 = std::string(where) == "q0";
    const auto allowed = allowed_families(kind, q0);
    if (!contains(allowed, family)) {
        throw ConfigError(std::string("'") + where + ".family' must be one of: " + join(allowed));
    }
    if (family != spec.family) {
        spec = ProfileSpec{};
        spec.family = family;
    }
    const auto& params = family_params().at(family);
    auto param = [&](const char* key, double& out) {
        if (s.has(key) && !contains(params, key)) {
            throw ConfigError(s.path(key) + " does not apply to family '" + family + "'");
        }
        s.number(key, out);
    };
    param("amplitude", spec.amplitude);
    param("width", spec.width);
    param("center", spec.center);
    param("k0", spec.k0);
    param("value", spec.value);
    param("epsilon", spec.epsilon);
    if (s.has("path") && family != "csv") {
        throw ConfigError(s.path("path") + " only applies to family 'csv'");
    }
    s.string("path", spec.path);
    s.finish();
}

void parse_coupling(const json& j, CouplingSpec& spec) {
    Section s(j, "b");
    std::string kind = spec.kind;
    s.string("kind", kind);
    if (!coupling_params().count(kind)) {
        throw ConfigError("'b.kind' must be one of: one, zero, constant, gaussian_density");
    }
    if (kind != spec.kind) {
        spec = CouplingSpec{};
        spec.kind = kind;
    }
    const auto& params = coupling_params().at(kind);
    for (const char* key : {"value", "sigma", "mean"}) {
        if (s.has(key) && !contains(params, key)) {
            throw ConfigError(s.path(key) + " does not apply to kind '" + kind + "'");
        }
    }
    s.number("value", spec.value);
    s.number("sigma", spec.sigma);
    s.number("mean", spec.mean);
    s.finish();
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

json profile_json(const ProfileSpec& p) {
    json j{{"family", p.family}};
    for (const auto& key : family_params().at(p.family)) {
        if (key == "amplitude") j[key] = p.amplitude;
        if (key == "width") j[key] = p.width;
        if (key == "center") j[key] = p.center;
        if (key == "k0") j[key] = p.k0;
        if (key == "value") j[key] = p.value;
        if (key == "epsilon") j[key] = p.epsilon;
        if (key == "path") j[key] = p.path;
    }
    return j;
}

json coupling_json(const CouplingSpec& b) {
    json j{{"kind", b.kind}};
    for (const auto& key : coupling_params().at(b.kind)) {
        if (key == "value") j[key] = b.value;
        if (key == "sigma") j[key] = b.sigma;
        if (key == "mean") j[key] = b.mean;
    }
    return j;
}

// Samples from a CSV file: one value or "re,im" per line, '#' lines skipped.
std::vector<std::vector<double>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read csv file '" + path + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception&) {
                throw ConfigError("csv file '" + path + "' has a non-numeric cell '" + cell + "'");
            }
            if (!std::isfinite(row.back())) {
                throw ConfigError("csv file '" + path + "' has a non-finite value");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Field1D csv_field(const std::string& path, int n, bool real_only) {
    const auto rows = read_csv(path);
    if (static_cast<int>(rows.size()) != n) {
        throw ConfigError("csv file '" + path + "' must have one row per grid point (" +
                          std::to_string(n) + "), got " + std::to_string(rows.size()));
    }
    Field1D f(n);
    for (int i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (r.size() == 1) {
            f(i) = r[0];
        } else if (r.size() == 2 && !real_only) {
            f(i) = cplx(r[0], r[1]);
        } else {
            throw ConfigError("csv file '" + path + "' rows must hold " +
                              (real_only ? "one value" : "one value or re,im"));
        }
    }
    return f;
}

double sech(double x) { return 1.0 / std::cosh(x); }

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Matrix:
            return "matrix";
        case ModelKind::Conv:
            return "conv";
        case ModelKind::Corr:
            return "corr";
        case ModelKind::Burgers:
            return "burgers";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "matrix") return ModelKind::Matrix;
    if (name == "conv") return ModelKind::Conv;
    if (name == "corr") return ModelKind::Corr;
    if (name == "burgers") return ModelKind::Burgers;
    throw ConfigError("unknown model '" + name + "' (expected matrix, conv, corr or burgers)");
}

RunConfig preset(ModelKind kind) {
    RunConfig c;
    c.model = kind;
    c.output_dir = "out/" + to_string(kind);
    switch (kind) {
        case ModelKind::Conv:
            c.L = 20.0;
            c.n = 512;
            c.g0.family = "gaussian";
            c.times = {1.0, 1e-3, {1.0}};
            c.oracle.tolerance = 1e-3;
            break;
        case ModelKind::Corr:
            c.L = 10.0;
            c.n = 256;
            c.g0.family = "sech_product";
            c.b.kind = "gaussian_density";
            c.b.sigma = 0.01;
            c.b.mean = 0.0;
            c.times = {2.0, 1e-3, {2.0}};
            c.oracle.tolerance = 1e-2;
            break;
        case ModelKind::Burgers:
            c.L = 10.0;
            c.n = 256;
            c.symbol = {0.0, 0.0, 1.0};
            c.q0.family = "one_plus_gaussian";
            c.q0.epsilon = 0.1;
            c.times = {1.0, 1e-3, {1.0}};
            c.oracle.tolerance = 1e-4;
            break;
        case ModelKind::Matrix:
            c.blocks.k = 2;
            c.blocks.m = 2;
            c.blocks.seed = 1;
            c.blocks.scale = 0.5;
            c.times = {1.0, 1e-3, {1.0}};
            c.oracle.tolerance = 1e-6;
            break;
    }
    return c;
}

RunConfig parse_config(const json& doc) {
    Section top(doc, "");
    std::string model_name;
    if (!top.string("model", model_name)) {
        throw ConfigError("'model' is required");
    }
    const ModelKind kind = parse_model_kind(model_name);
    RunConfig c = preset(kind);

    const bool spatial = kind != ModelKind::Matrix;
    auto require_applicable = [&](const char* key, bool ok) {
        if (top.has(key) && !ok) {
            throw ConfigError(top.path(key) + " does not apply to model '" + model_name + "'");
        }
    };
    require_applicable("grid", spatial);
    require_applicable("symbol", kind == ModelKind::Conv || kind == ModelKind::Corr);
    require_applicable("g0", kind == ModelKind::Conv || kind == ModelKind::Corr);
    require_applicable("b", kind == ModelKind::Corr);
    require_applicable("q0", kind == ModelKind::Burgers);
    require_applicable("blocks", kind == ModelKind::Matrix);

    if (const json* g = top.raw("grid")) {
        Section s(*g, "grid");
        s.number("L", c.L);
        s.integer("n", c.n);
        s.finish();
    }
    top.numbers("symbol", c.symbol);
    if (const json* g = top.raw("g0")) {
        parse_profile(*g, "g0", kind, c.g0);
    }
    if (const json* b = top.raw("b")) {
        parse_coupling(*b, c.b);
    }
    if (const json* q = top.raw("q0")) {
        parse_profile(*q, "q0", kind, c.q0);
    }
    if (const json* bl = top.raw("blocks")) {
        Section s(*bl, "blocks");
        s.integer("k", c.blocks.k);
        s.integer("m", c.blocks.m);
        s.integer("seed", c.blocks.seed);
        s.number("scale", c.blocks.scale);
        s.matrix("A", c.blocks.A);
        s.matrix("B", c.blocks.B);
        s.matrix("C", c.blocks.C);
        s.matrix("D", c.blocks.D);
        s.matrix("G0", c.blocks.G0);
        s.finish();
        if (c.blocks.A) {
            // Explicit blocks fix the dimensions.
            c.blocks.k = static_cast<int>(c.blocks.A->rows());
            if (c.blocks.D) {
                c.blocks.m = static_cast<int>(c.blocks.D->rows());
            }
        }
    }
    if (const json* t = top.raw("times")) {
        Section s(*t, "times");
        const bool has_final = s.number("t_final", c.times.t_final);
        s.number("dt", c.times.dt);
        if (!s.numbers("query", c.times.query) && has_final) {
            c.times.query = {c.times.t_final};
        }
        s.finish();
    }
    if (const json* t = top.raw("toggles")) {
        Section s(*t, "toggles");
        s.boolean("oracle", c.toggles.oracle);
        s.boolean("general_path", c.toggles.general_path);
        s.integer("det2_stride", c.toggles.det2_stride);
        s.finish();
    }
    if (const json* o = top.raw("oracle")) {
        Section s(*o, "oracle");
        s.number("dt", c.oracle.dt);
        s.number("tolerance", c.oracle.tolerance);
        if (s.has("scheme") && kind != ModelKind::Conv) {
            throw ConfigError("'oracle.scheme' only applies to model 'conv'");
        }
        if (s.has("stencil_order") && kind != ModelKind::Conv) {
            throw ConfigError("'oracle.stencil_order' only applies to model 'conv'");
        }
        s.string("scheme", c.oracle.scheme);
        s.integer("stencil_order", c.oracle.stencil_order);
        s.finish();
    }
    top.number("residual_h", c.residual_h);
    top.string("output_dir", c.output_dir);
    top.finish();

    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    json j;
    j["model"] = to_string(c.model);
    if (c.model != ModelKind::Matrix) {
        j["grid"] = {{"L", c.L}, {"n", c.n}};
    }
    if (c.model == ModelKind::Conv || c.model == ModelKind::Corr) {
        j["symbol"] = c.symbol;
        j["g0"] = profile_json(c.g0);
    }
    if (c.model == ModelKind::Corr) {
        j["b"] = coupling_json(c.b);
    }
    if (c.model == ModelKind::Burgers) {
        j["q0"] = profile_json(c.q0);
    }
    if (c.model == ModelKind::Matrix) {
        json b{{"k", c.blocks.k}, {"m", c.blocks.m}, {"seed", c.blocks.seed}, {"scale", c.blocks.scale}};
        if (c.blocks.A) {
            b["A"] = matrix_json(*c.blocks.A);
            b["B"] = matrix_json(*c.blocks.B);
            b["C"] = matrix_json(*c.blocks.C);
            b["D"] = matrix_json(*c.blocks.D);
        }
        if (c.blocks.G0) {
            b["G0"] = matrix_json(*c.blocks.G0);
        }
        j["blocks"] = b;
    }
    j["times"] = {{"t_final", c.times.t_final}, {"dt", c.times.dt}, {"query", c.times.query}};
    j["toggles"] = {{"oracle", c.toggles.oracle},
                    {"general_path", c.toggles.general_path},
                    {"det2_stride", c.toggles.det2_stride}};
    json o{{"dt", c.oracle.dt}, {"tolerance", c.oracle.tolerance}};
    if (c.model == ModelKind::Conv) {
        o["scheme"] = c.oracle.scheme;
        o["stencil_order"] = c.oracle.stencil_order;
    }
    j["oracle"] = o;
    j["residual_h"] = c.residual_h;
    j["output_dir"] = c.output_dir;
    return j;
}

void validate(const RunConfig& c) {
    const bool spatial = c.model != ModelKind::Matrix;
    if (spatial) {
        if (!(c.L > 0.0) || !std::isfinite(c.L)) {
            throw ConfigError("'grid.L' must be positive");
        }
        if (c.n < 8 || c.n % 2 != 0) {
            throw ConfigError("'grid.n' must be even and at least 8, got " + std::to_string(c.n));
        }
        if (c.n > 16384) {
            throw ConfigError("'grid.n' above 16384 is not supported");
        }
    }
    if (c.model == ModelKind::Conv || c.model == ModelKind::Corr) {
        if (c.symbol.empty()) {
            throw ConfigError("'symbol' must have at least one coefficient");
        }
        const SpectralSymbol d(c.symbol);
        if (!d.admissible(Grid1D(c.L, c.n))) {
            throw ConfigError("'symbol' is not admissible: Re d(2πik) exceeds d(0) on the grid");
        }
        const auto allowed = allowed_families(c.model, false);
        if (!contains(allowed, c.g0.family)) {
            throw ConfigError("'g0.family' must be one of: " + join(allowed));
        }
    }
    if (c.model == ModelKind::Burgers && !contains(allowed_families(c.model, true), c.q0.family)) {
        throw ConfigError("'q0.family' must be one of: " + join(allowed_families(c.model, true)));
    }
    for (const ProfileSpec* p : {&c.g0, &c.q0}) {
        if (p->family.empty()) {
            continue;
        }
        if ((p->family == "gaussian" || p->family == "sech" || p->family == "gaussian2d" ||
             p->family == "one_plus_gaussian") &&
            !(p->width > 0.0)) {
            throw ConfigError("profile width must be positive");
        }
        if (p->family == "csv" && p->path.empty()) {
            throw ConfigError("csv profile needs a 'path'");
        }
        if (p->family == "single_mode") {
            const double idx = p->k0 * 2.0 * c.L;
            if (std::abs(idx - std::round(idx)) > 1e-9 || std::abs(std::round(idx)) >= c.n / 2) {
                throw ConfigError("'g0.k0' must be a grid frequency m/(2L) with |m| < n/2");
            }
        }
    }
    if (c.model == ModelKind::Corr) {
        if (!coupling_params().count(c.b.kind)) {
            throw ConfigError("'b.kind' must be one of: one, zero, constant, gaussian_density");
        }
        if (c.b.kind == "gaussian_density" && !(c.b.sigma > 0.0)) {
            throw ConfigError("'b.sigma' must be positive");
        }
    }
    if (c.model == ModelKind::Matrix) {
        const auto& b = c.blocks;
        if (b.k < 1 || b.m < 1 || b.k > 512 || b.m > 512) {
            throw ConfigError("'blocks.k' and 'blocks.m' must be in [1, 512]");
        }
        const int given = !!b.A + !!b.B + !!b.C + !!b.D;
        if (given != 0 && given != 4) {
            throw ConfigError("explicit blocks need all of A, B, C and D");
        }
        auto shape = [](const std::optional<Eigen::MatrixXd>& m, int rows, int cols, const char* name) {
            if (m && (m->rows() != rows || m->cols() != cols)) {
                throw ConfigError(std::string("'blocks.") + name + "' must be " + std::to_string(rows) +
                                  "x" + std::to_string(cols));
            }
        };
        shape(b.A, b.k, b.k, "A");
        shape(b.B, b.k, b.m, "B");
        shape(b.C, b.m, b.k, "C");
        shape(b.D, b.m, b.m, "D");
        shape(b.G0, b.m, b.k, "G0");
        if (!(b.scale >= 0.0)) {
            throw ConfigError("'blocks.scale' must be non-negative");
        }
    }
    if (!(c.times.t_final >= 0.0)) {
        throw ConfigError("'times.t_final' must be non-negative");
    }
    if (!(c.times.dt > 0.0)) {
        throw ConfigError("'times.dt' must be positive");
    }
    if (c.times.query.empty()) {
        throw ConfigError("'times.query' must not be empty");
    }
    double prev = 0.0;
    for (double t : c.times.query) {
        if (!(t >= prev) || t > c.times.t_final) {
            throw ConfigError("'times.query' must be ascending within [0, t_final]");
        }
        prev = t;
    }
    if (c.toggles.det2_stride < 1) {
        throw ConfigError("'toggles.det2_stride' must be at least 1");
    }
    if (!(c.oracle.dt > 0.0) || !(c.oracle.tolerance > 0.0)) {
        throw ConfigError("'oracle.dt' and 'oracle.tolerance' must be positive");
    }
    if (c.oracle.scheme != "stencil" && c.oracle.scheme != "spectral") {
        throw ConfigError("'oracle.scheme' must be 'stencil' or 'spectral'");
    }
    if (c.oracle.stencil_order != 2 && c.oracle.stencil_order != 4) {
        throw ConfigError("'oracle.stencil_order' must be 2 or 4");
    }
    if (!(c.residual_h > 0.0)) {
        throw ConfigError("'residual_h' must be positive");
    }
    if (c.output_dir.empty()) {
        throw ConfigError("'output_dir' must not be empty");
    }
}

void set_parameter(RunConfig& cfg, const std::string& path, double value) {
    json j = to_json(cfg);
    if (path == "t") {
        j["times"]["t_final"] = value;
        j["times"]["query"] = json::array({value});
    } else {
        const std::string full = path == "dt" ? "times.dt" : path;
        json* node = &j;
        std::stringstream ss(full);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.')) {
            parts.push_back(part);
        }
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const std::string& key = parts[i];
            if (node->is_array()) {
                std::size_t idx = 0;
                try {
                    idx = std::stoul(key);
                } catch (const std::exception&) {
                    throw ConfigError("parameter '" + path + "': '" + key + "' is not an index");
                }
                if (idx >= node->size()) {
                    throw ConfigError("parameter '" + path + "': index out of range");
                }
                node = &(*node)[idx];
            } else if (node->is_object() && node->contains(key)) {
                node = &(*node)[key];
            } else {
                throw ConfigError("unknown parameter '" + path + "'");
            }
        }
        if (!node->is_number()) {
            throw ConfigError("parameter '" + path + "' is not numeric");
        }
        if (node->is_number_integer()) {
            if (value != std::floor(value)) {
                throw ConfigError("parameter '" + path + "' must be an integer");
            }
            *node = static_cast<long long>(value);
        } else {
            *node = value;
        }
        if (full == "times.t_final") {
            // Keep the query list inside the horizon.
            json q = json::array();
            for (const json& t : j["times"]["query"]) {
                if (t.get<double>() <= value) {
                    q.push_back(t);
                }
            }
            if (q.empty()) {
                q.push_back(value);
            }
            j["times"]["query"] = q;
        }
    }
    cfg = parse_config(j);
}

Grid1D make_grid(const RunConfig& cfg) {
    if (cfg.model == ModelKind::Matrix) {
        throw ConfigError("the matrix model has no grid");
    }
    return Grid1D(cfg.L, cfg.n);
}

ConvModel make_conv_model(const RunConfig& cfg) {
    const Grid1D grid = make_grid(cfg);
    const ProfileSpec& p = cfg.g0;
    Field1D g0(grid.size());
    if (p.family == "csv") {
        g0 = csv_field(p.path, grid.size(), false);
    } else {
        for (int i = 0; i < grid.size(); ++i) {
            const double x = grid.point(i);
            const double s = (x - p.center) / p.width;
            if (p.family == "gaussian") {
                g0(i) = p.amplitude * std::exp(-s * s);
            } else if (p.family == "sech") {
                g0(i) = p.amplitude * sech(s);
            } else if (p.family == "single_mode") {
                // Transform equals value at k0 and vanishes at every other grid frequency.
                g0(i) = p.value / (2.0 * grid.half_width()) *
                        std::polar(1.0, -2.0 * std::numbers::pi * p.k0 * x);
            } else {
                throw ConfigError("family '" + p.family + "' does not apply to model 'conv'");
            }
        }
    }
    return ConvModel{grid, SpectralSymbol(cfg.symbol), std::move(g0)};
}

CorrModel make_corr_model(const RunConfig& cfg) {
    const Grid1D grid = make_grid(cfg);
    const int n = grid.size();
    const ProfileSpec& p = cfg.g0;
    Kernel2D g0(grid);
    if (p.family == "csv") {
        const auto rows = read_csv(p.path);
        if (static_cast<int>(rows.size()) != n) {
            throw ConfigError("csv kernel '" + p.path + "' must have n rows");
        }
        for (int i = 0; i < n; ++i) {
            const auto& r = rows[static_cast<std::size_t>(i)];
            if (static_cast<int>(r.size()) != n) {
                throw ConfigError("csv kernel '" + p.path + "' must have n columns per row");
            }
            for (int j = 0; j < n; ++j) {
                g0.values()(i, j) = r[static_cast<std::size_t>(j)];
            }
        }
    } else if (p.family == "sech_product") {
        g0 = Kernel2D::sample(grid, [a = p.amplitude](double x, double y) {
            return cplx(a * sech(x + y) * sech(y));
        });
    } else if (p.family == "gaussian2d") {
        g0 = Kernel2D::sample(grid, [p](double x, double y) {
            const double sx = (x - p.center) / p.width;
            const double sy = (y - p.center) / p.width;
            return cplx(p.amplitude * std::exp(-sx * sx - sy * sy));
        });
    } else {
        throw ConfigError("family '" + p.family + "' does not apply to model 'corr'");
    }

    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.point(i);
        if (cfg.b.kind == "one") {
            b(i) = 1.0;
        } else if (cfg.b.kind == "zero") {
            b(i) = 0.0;
        } else if (cfg.b.kind == "constant") {
            b(i) = cfg.b.value;
        } else {
            const double s = (x - cfg.b.mean) / cfg.b.sigma;
            b(i) = std::exp(-0.5 * s * s) / (cfg.b.sigma * std::sqrt(2.0 * std::numbers::pi));
        }
    }
    return CorrModel{grid, SpectralSymbol(cfg.symbol), std::move(b), std::move(g0)};
}

BurgersModel make_burgers_model(const RunConfig& cfg) {
    const Grid1D grid = make_grid(cfg);
    const ProfileSpec& p = cfg.q0;
    Eigen::VectorXd q0(grid.size());
    if (p.family == "csv") {
        q0 = csv_field(p.path, grid.size(), true).real();
    } else {
        for (int i = 0; i < grid.size(); ++i) {
            const double s = grid.point(i) / p.width;
            if (p.family == "one_plus_gaussian") {
                q0(i) = 1.0 + p.epsilon * std::exp(-std::numbers::pi * s * s);
            } else if (p.family == "constant") {
                q0(i) = p.value;
            } else {
                throw ConfigError("family '" + p.family + "' does not apply to model 'burgers'");
            }
        }
    }
    if (q0.minCoeff() <= 0.0) {
        throw NonPositiveQ("q0 must be strictly positive (min q0 = " +
                               std::to_string(q0.minCoeff()) + ")",
                           q0.minCoeff());
    }
    return BurgersModel{grid, std::move(q0)};
}

BlockSystem make_block_system(const RunConfig& cfg) {
    const BlocksSpec& b = cfg.blocks;
    if (b.A) {
        return BlockSystem::constant(b.A->cast<cplx>(), b.B->cast<cplx>(), b.C->cast<cplx>(),
                                     b.D->cast<cplx>());
    }
    return BlockSystem::random(b.k, b.m, b.seed, b.scale);
}

Eigen::MatrixXcd make_matrix_g0(const RunConfig& cfg) {
    const BlocksSpec& b = cfg.blocks;
    if (b.G0) {
        return b.G0->cast<cplx>();
    }
    return Eigen::MatrixXcd::Zero(b.m, b.k);
}

}  // namespace riccati
