#include "fracrd/scenario_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "fracrd/errors.hpp"

namespace fracrd {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool parse_double(const std::string& text, double& out) {
    const std::string s = trim(text);
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

// Sectioned key-value document with per-key line numbers.
class Document {
public:
    Document(const std::string& text, std::string origin) : origin_(std::move(origin)) {
        std::istringstream in(text);
        std::string raw;
        std::string section;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = raw;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') fail(line_no, "malformed section header '" + line + "'");
                section = lower(trim(line.substr(1, line.size() - 2)));
                if (section.empty()) fail(line_no, "empty section name");
                sections_[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
            if (section.empty()) fail(line_no, "key outside of any section");
            const std::string key = lower(trim(line.substr(0, eq)));
            if (key.empty()) fail(line_no, "missing key name");
            auto& sec = sections_[section];
            if (sec.count(key)) fail(line_no, section + "." + key + " is given twice");
            sec[key] = Entry{trim(line.substr(eq + 1)), line_no, false};
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw InvalidParameter(origin_ + ":" + std::to_string(line) + ": " + msg);
    }
    [[noreturn]] void fail_field(const std::string& sec, const std::string& key, const std::string& msg) const {
        const Entry* e = find(sec, key);
        throw InvalidParameter(origin_ + ":" + std::to_string(e ? e->line : 0) + ": " + sec + "." + key + " " + msg);
    }

    bool has(const std::string& sec, const std::string& key) const { return find(sec, key) != nullptr; }
    bool has_section(const std::string& sec) const { return sections_.count(sec) != 0; }

    std::string str(const std::string& sec, const std::string& key, const std::string& def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        e->used = true;
        return e->value;
    }

    double num(const std::string& sec, const std::string& key, double def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        e->used = true;
        double v = 0.0;
        if (!parse_double(e->value, v) || !std::isfinite(v))
            fail(e->line, sec + "." + key + " must be a finite number, got '" + e->value + "'");
        return v;
    }

    double required_num(const std::string& sec, const std::string& key) {
        if (!has(sec, key)) throw InvalidParameter(origin_ + ": " + sec + "." + key + " is required");
        return num(sec, key, 0.0);
    }

    long integer(const std::string& sec, const std::string& key, long def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        const double v = num(sec, key, 0.0);
        if (v != std::floor(v) || std::abs(v) > 1e15)
            fail(e->line, sec + "." + key + " must be an integer, got '" + e->value + "'");
        return static_cast<long>(v);
    }

    bool flag(const std::string& sec, const std::string& key, bool def) {
        Entry* e = find(sec, key);
        if (!e) return def;
        e->used = true;
        const std::string v = lower(e->value);
        if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
        if (v == "false" || v == "no" || v == "off" || v == "0") return false;
        fail(e->line, sec + "." + key + " must be true or false, got '" + e->value + "'");
    }

    std::vector<double> list(const std::string& sec, const std::string& key) {
        Entry* e = find(sec, key);
        if (!e) return {};
        e->used = true;
        std::vector<double> out;
        for (const auto& tok : split_fields(e->value)) {
            double v = 0.0;
            if (!parse_double(tok, v) || !std::isfinite(v))
                fail(e->line, sec + "." + key + ": '" + tok + "' is not a number");
            out.push_back(v);
        }
        if (out.empty()) fail(e->line, sec + "." + key + " must list at least one value");
        return out;
    }

    int line_of(const std::string& sec, const std::string& key) const {
        const Entry* e = find(sec, key);
        return e ? e->line : 0;
    }

    void reject_unused(const std::vector<std::string>& known_sections) const {
        for (const auto& [name, sec] : sections_) {
            bool known = false;
            for (const auto& k : known_sections) known = known || k == name;
            if (!known) throw InvalidParameter(origin_ + ": unknown section [" + name + "]");
            for (const auto& [key, entry] : sec)
                if (!entry.used) fail(entry.line, "unknown key " + name + "." + key);
        }
    }

    const std::string& origin() const { return origin_; }

private:
    Entry* find(const std::string& sec, const std::string& key) {
        auto s = sections_.find(sec);
        if (s == sections_.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }
    const Entry* find(const std::string& sec, const std::string& key) const {
        return const_cast<Document*>(this)->find(sec, key);
    }

    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

std::string resolve(const std::string& base_dir, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_absolute()) return file;
    return (std::filesystem::path(base_dir) / p).string();
}

std::vector<SpaceOperator> parse_operators(Document& doc) {
    const std::string sec = "orders";
    std::vector<SpaceOperator> ops;
    if (doc.has(sec, "operators")) {
        if (doc.has(sec, "lambda") || doc.has(sec, "gamma") || doc.has(sec, "theta"))
            doc.fail_field(sec, "operators", "cannot be combined with orders.lambda/gamma/theta");
        const int line = doc.line_of(sec, "operators");
        const std::string text = doc.str(sec, "operators", "");
        std::size_t pos = 0;
        while (true) {
            const auto open = text.find('(', pos);
            if (open == std::string::npos) {
                if (!trim(text.substr(pos)).empty())
                    doc.fail(line, "orders.operators: unexpected text '" + trim(text.substr(pos)) + "'");
                break;
            }
            if (!trim(text.substr(pos, open - pos)).empty() && trim(text.substr(pos, open - pos)) != ",")
                doc.fail(line, "orders.operators: unexpected text before '('");
            const auto close = text.find(')', open);
            if (close == std::string::npos) doc.fail(line, "orders.operators: missing ')'");
            const auto parts = split_fields(text.substr(open + 1, close - open - 1));
            if (parts.size() != 3)
                doc.fail(line, "orders.operators: each entry is (lambda, gamma, theta), got " +
                                   std::to_string(parts.size()) + " values");
            double v[3];
            for (int i = 0; i < 3; ++i)
                if (!parse_double(parts[static_cast<std::size_t>(i)], v[i]))
                    doc.fail(line, "orders.operators: '" + parts[static_cast<std::size_t>(i)] + "' is not a number");
            ops.push_back(SpaceOperator{v[1], v[2], v[0]});
            pos = close + 1;
        }
        if (ops.empty()) doc.fail(line, "orders.operators must list at least one (lambda, gamma, theta)");
    } else {
        if (!doc.has(sec, "gamma"))
            throw InvalidParameter(doc.origin() + ": orders.gamma (or orders.operators) is required");
        SpaceOperator op;
        op.gamma = doc.num(sec, "gamma", 2.0);
        op.theta = doc.num(sec, "theta", 0.0);
        op.lambda = doc.num(sec, "lambda", 1.0);
        ops.push_back(op);
    }
    for (std::size_t i = 0; i < ops.size(); ++i) {
        try {
            ops[i].validate();
        } catch (const InvalidParameter& e) {
            doc.fail(doc.line_of(sec, doc.has(sec, "operators") ? "operators" : "gamma"),
                     "orders operator " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return ops;
}

Profile parse_profile(Document& doc, const std::string& sec, const std::string& prefix, const std::string& field,
                      const std::string& kind, const std::string& base_dir) {
    const std::string k = lower(kind);
    Profile p;
    if (k == "zero") return Profile::zero_profile();
    if (k == "delta") {
        p = Profile::delta(doc.num(sec, prefix + "amplitude", 1.0), doc.num(sec, prefix + "center", 0.0));
    } else if (k == "gaussian") {
        p = Profile::gaussian(doc.num(sec, prefix + "amplitude", 1.0), doc.num(sec, prefix + "center", 0.0),
                              doc.num(sec, prefix + "width", 1.0));
    } else if (k == "table") {
        if (!doc.has(sec, prefix + "file"))
            throw InvalidParameter(doc.origin() + ": " + sec + "." + prefix + "file is required for a table profile");
        const std::string file = doc.str(sec, prefix + "file", "");
        std::optional<double> t_sel;
        if (doc.has(sec, prefix + "file_t")) t_sel = doc.num(sec, prefix + "file_t", 0.0);
        p.kind = Profile::Kind::table;
        p.amplitude = 1.0;
        p.table = load_profile_table(resolve(base_dir, file), field, t_sel);
    } else {
        doc.fail_field(sec, prefix + "kind", "must be zero, delta, gaussian or table, got '" + kind + "'");
    }
    try {
        p.validate(field);
    } catch (const InvalidParameter& e) {
        doc.fail(doc.line_of(sec, prefix + "kind"), e.what());
    }
    return p;
}

}  // namespace

ScenarioBundle parse_scenario(const std::string& text, const std::string& origin, const std::string& base_dir) {
    Document doc(text, origin);
    ScenarioBundle out;
    Scenario& sc = out.scenario;

    if (!doc.has_section("orders")) throw InvalidParameter(origin + ": section [orders] is required");
    sc.orders.alpha = doc.required_num("orders", "alpha");
    sc.orders.beta = doc.num("orders", "beta", sc.orders.alpha);
    sc.orders.a = doc.num("orders", "a", 0.0);
    sc.orders.operators = parse_operators(doc);

    const std::string f_kind = doc.str("initial", "kind", "delta");
    if (!doc.has("initial", "kind") && doc.has("initial", "file"))
        doc.fail_field("initial", "file", "needs initial.kind = table");
    sc.f = parse_profile(doc, "initial", "", "initial.f", f_kind, base_dir);
    if (doc.has("initial", "g_kind")) {
        sc.g = parse_profile(doc, "initial", "g_", "initial.g", doc.str("initial", "g_kind", "zero"), base_dir);
    }

    const std::string src = lower(doc.str("source", "kind", "zero"));
    if (src == "zero") {
        sc.U.kind = SourceSpec::Kind::zero;
    } else if (src == "separable") {
        sc.U.kind = SourceSpec::Kind::separable;
        sc.U.space = parse_profile(doc, "source", "space_", "source.space", doc.str("source", "space_kind", "gaussian"),
                                   base_dir);
        const std::string tk = lower(doc.str("source", "time", "constant"));
        if (tk == "constant")
            sc.U.time_kind = SourceSpec::TimeKind::constant;
        else if (tk == "exponential")
            sc.U.time_kind = SourceSpec::TimeKind::exponential;
        else
            doc.fail_field("source", "time", "must be constant or exponential, got '" + tk + "'");
        sc.U.time_value = doc.num("source", "time_value", 1.0);
        sc.U.time_rate = doc.num("source", "time_rate", 0.0);
    } else if (src == "table") {
        if (!doc.has("source", "file"))
            throw InvalidParameter(origin + ": source.file is required for a table source");
        const SourceSpec table = load_source_table(resolve(base_dir, doc.str("source", "file", "")), "source.file");
        sc.U = table;
    } else {
        doc.fail_field("source", "kind", "must be zero, separable or table, got '" + src + "'");
    }

    // grids
    sc.t_points = doc.list("grids", "t_points");
    if (sc.t_points.empty()) throw InvalidParameter(origin + ": grids.t_points is required");
    if (doc.has("grids", "x_points")) {
        if (doc.has("grids", "x_min") || doc.has("grids", "x_max") || doc.has("grids", "n_x"))
            doc.fail_field("grids", "x_points", "cannot be combined with grids.x_min/x_max/n_x");
        sc.x_grid = doc.list("grids", "x_points");
    } else {
        const double x_min = doc.num("grids", "x_min", -10.0);
        const double x_max = doc.num("grids", "x_max", 10.0);
        const long n_x = doc.integer("grids", "n_x", 201);
        if (n_x < 1) doc.fail_field("grids", "n_x", "must be >= 1");
        if (n_x > 1 && !(x_max > x_min)) doc.fail_field("grids", "x_max", "must exceed grids.x_min");
        sc.x_grid.resize(static_cast<std::size_t>(n_x));
        for (long i = 0; i < n_x; ++i)
            sc.x_grid[static_cast<std::size_t>(i)] =
                n_x == 1 ? x_min : x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(n_x - 1);
    }
    sc.spectral.K = doc.num("grids", "k", 0.0);
    sc.spectral.dk = doc.num("grids", "dk", 0.0);
    sc.spectral.exploit_symmetry = doc.flag("grids", "symmetry", true);
    sc.spectral.refine = doc.flag("grids", "refine", false);

    sc.tol.kernel = doc.num("tolerances", "kernel", sc.tol.kernel);
    sc.tol.convolution = doc.num("tolerances", "convolution", sc.tol.convolution);
    sc.tol.cutoff_decay = doc.num("tolerances", "cutoff_decay", sc.tol.cutoff_decay);
    sc.tol.refine = doc.num("tolerances", "refine", sc.tol.refine);
    sc.tol.max_cutoff_doublings =
        static_cast<int>(doc.integer("tolerances", "max_cutoff_doublings", sc.tol.max_cutoff_doublings));
    for (const char* key : {"kernel", "convolution", "cutoff_decay", "refine"})
        if (doc.has("tolerances", key) && !(doc.num("tolerances", key, 1.0) > 0.0))
            doc.fail_field("tolerances", key, "must be > 0");

    const std::string backend = lower(doc.str("solver", "backend", "series"));
    if (backend == "series")
        sc.backend = KernelBackend::series;
    else if (backend == "talbot")
        sc.backend = KernelBackend::talbot;
    else
        doc.fail_field("solver", "backend", "must be series or talbot, got '" + backend + "'");

    out.fd.L = doc.num("fd", "l", out.fd.L);
    out.fd.n_x = static_cast<std::size_t>(std::max(0L, doc.integer("fd", "n_x", static_cast<long>(out.fd.n_x))));
    out.fd.dt = doc.num("fd", "dt", out.fd.dt);
    out.fd.n_t = static_cast<std::size_t>(std::max(0L, doc.integer("fd", "n_t", 0)));
    out.fd_options.boundary_tol = doc.num("fd", "boundary_tol", out.fd_options.boundary_tol);
    out.fd_options.growth_limit = doc.num("fd", "growth_limit", out.fd_options.growth_limit);

    out.residual.T = doc.num("residual", "t", 0.0);
    out.residual.x = doc.list("residual", "x");
    out.residual.options.dt = doc.num("residual", "dt", out.residual.options.dt);
    out.residual.options.half_width = doc.num("residual", "half_width", out.residual.options.half_width);
    out.residual.options.dx = doc.num("residual", "dx", out.residual.options.dx);
    out.residual.options.quadrature_tol = doc.num("residual", "quadrature_tol", out.residual.options.quadrature_tol);
    if (out.residual.T > 0.0 && out.residual.x.empty()) out.residual.x = {0.0};

    doc.reject_unused({"orders", "initial", "source", "grids", "tolerances", "solver", "fd", "residual"});

    try {
        sc.validate();
    } catch (const InvalidParameter& e) {
        throw InvalidParameter(origin + ": " + e.what());
    }
    return out;
}

ScenarioBundle load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("scenario: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_scenario(ss.str(), path, dir.empty() ? "." : dir.string());
}

namespace {

struct Row {
    std::vector<double> v;
    int line = 0;
};

// Numeric rows of a comma or whitespace separated file, with the header (if any).
std::vector<Row> read_numeric(const std::string& path, const std::string& field, std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter(field + ": cannot open table '" + path + "'");
    std::vector<Row> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto parts = split_fields(line);
        if (parts.empty()) continue;
        Row r;
        r.line = line_no;
        bool numeric = true;
        for (const auto& p : parts) {
            double v = 0.0;
            if (!parse_double(p, v)) {
                numeric = false;
                break;
            }
            r.v.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && header.empty()) {
                header = parts;
                continue;
            }
            throw InvalidParameter(field + ": " + path + ":" + std::to_string(line_no) + ": non-numeric row");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

UniformSamples make_uniform(const std::vector<double>& xs, const std::vector<double>& vs, const std::string& path,
                            const std::string& field) {
    if (xs.size() < 2) throw InvalidParameter(field + ": " + path + " needs at least 2 rows");
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    if (!(dx > 0.0)) throw InvalidParameter(field + ": " + path + " x column must be increasing");
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (std::abs(xs[i] - (xs.front() + dx * static_cast<double>(i))) > 1e-8 * dx)
            throw InvalidParameter(field + ": " + path + " x column must be uniformly spaced (row " +
                                   std::to_string(i + 1) + ")");
    return UniformSamples{xs.front(), dx, vs};
}

bool is_solve_header(const std::vector<std::string>& header) {
    return header.size() == 4 && header[0] == "t" && header[1] == "x" && header[2] == "N";
}

}  // namespace

UniformSamples load_profile_table(const std::string& path, const std::string& field, std::optional<double> t_select) {
    std::vector<std::string> header;
    const auto rows = read_numeric(path, field, header);
    if (rows.empty()) throw InvalidParameter(field + ": " + path + " has no data rows");
    std::vector<double> xs, vs;
    if (is_solve_header(header) || rows.front().v.size() == 4) {
        const double t = t_select ? *t_select : rows.front().v[0];
        bool found = false;
        for (const auto& r : rows) {
            if (r.v.size() != 4)
                throw InvalidParameter(field + ": " + path + ":" + std::to_string(r.line) + ": expected 4 columns");
            if (std::abs(r.v[0] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
                xs.push_back(r.v[1]);
                vs.push_back(r.v[2]);
                found = true;
            }
        }
        if (!found) throw InvalidParameter(field + ": " + path + " has no rows at t=" + format_number(t));
    } else {
        if (t_select) throw InvalidParameter(field + ": a time selection needs the t,x,N,imag_residue format");
        for (const auto& r : rows) {
            if (r.v.size() != 2)
                throw InvalidParameter(field + ": " + path + ":" + std::to_string(r.line) + ": expected 2 columns (x,value)");
            xs.push_back(r.v[0]);
            vs.push_back(r.v[1]);
        }
    }
    return make_uniform(xs, vs, path, field);
}

SourceSpec load_source_table(const std::string& path, const std::string& field) {
    std::vector<std::string> header;
    const auto rows = read_numeric(path, field, header);
    std::vector<double> times;
    std::vector<std::vector<double>> xs, vs;
    for (const auto& r : rows) {
        if (r.v.size() != 3 && r.v.size() != 4)
            throw InvalidParameter(field + ": " + path + ":" + std::to_string(r.line) + ": expected t,x,value");
        if (times.empty() || r.v[0] != times.back()) {
            if (!times.empty() && !(r.v[0] > times.back()))
                throw InvalidParameter(field + ": " + path + ":" + std::to_string(r.line) + ": t must be increasing");
            times.push_back(r.v[0]);
            xs.emplace_back();
            vs.emplace_back();
        }
        xs.back().push_back(r.v[1]);
        vs.back().push_back(r.v[2]);
    }
    if (times.size() < 2) throw InvalidParameter(field + ": " + path + " needs at least 2 distinct times");
    SourceSpec U;
    U.kind = SourceSpec::Kind::table;
    U.table_t0 = times.front();
    U.table_dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(times[i] - (U.table_t0 + U.table_dt * static_cast<double>(i))) > 1e-8 * U.table_dt)
            throw InvalidParameter(field + ": " + path + " times must be uniformly spaced");
        U.table_rows.push_back(make_uniform(xs[i], vs[i], path, field));
    }
    return U;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.14e", v);
    return buf;
}

void write_field_csv(std::ostream& os, const Field& field) {
    os << "t,x,N,imag_residue\n";
    for (std::size_t i = 0; i < field.t_points.size(); ++i)
        for (std::size_t j = 0; j < field.x_grid.size(); ++j)
            os << format_number(field.t_points[i]) << ',' << format_number(field.x_grid[j]) << ','
               << format_number(field.values[i][j]) << ',' << format_number(field.imag_residue[i][j]) << '\n';
}

void write_profile_table(std::ostream& os, const UniformSamples& table) {
    os << "x,value\n";
    for (std::size_t i = 0; i < table.values.size(); ++i)
        os << format_number(table.x0 + table.dx * static_cast<double>(i)) << ',' << format_number(table.values[i])
           << '\n';
}

}  // namespace fracrd
