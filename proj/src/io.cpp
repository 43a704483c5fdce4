#include "spincat/io.hpp"

#include <fmt/format.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spincat::io {

namespace fs = std::filesystem;

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument(fmt::format("row has {} cells, table has {} columns", row.size(), columns.size()));
    rows.push_back(std::move(row));
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::out_of_range(fmt::format("no column '{}'", name));
}

std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        return fmt::format("{:.17g}", *d);
    }
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

namespace {

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace

std::string to_csv(const Table& t) {
    std::string out;
    auto line = [&](const auto& cells, auto&& text) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += quote_field(text(cells[i]));
        }
        out += "\r\n";
    };
    line(t.columns, [](const std::string& s) { return s; });
    for (const auto& r : t.rows) line(r, [](const Cell& c) { return format_cell(c); });
    return out;
}

Table parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, field_started = false;
    std::size_t i = 0;
    auto end_field = [&]() {
        rec.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&]() {
        end_field();
        records.push_back(std::move(rec));
        rec.clear();
    };
    while (i < text.size()) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field += ch;
            }
            ++i;
            continue;
        }
        if (ch == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (ch == ',') {
            end_field();
        } else if (ch == '\r' || ch == '\n') {
            end_record();
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            field += ch;
            field_started = true;
        }
        ++i;
    }
    if (quoted) throw ValidationError("unterminated quoted CSV field");
    if (field_started || !rec.empty()) end_record();
    if (records.empty()) throw ValidationError("CSV has no header");

    Table t(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.columns.size())
            throw ValidationError(fmt::format("CSV record {} has {} fields, header has {}", r, records[r].size(),
                                              t.columns.size()));
        t.rows.emplace_back(records[r].begin(), records[r].end());
    }
    return t;
}

double as_double(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    const std::string& s = std::get<std::string>(c);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ValidationError(fmt::format("'{}' is not a number", s));
    return v;
}

long long as_int(const Cell& c) {
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    if (const auto* d = std::get_if<double>(&c)) return std::llround(*d);
    const std::string& s = std::get<std::string>(c);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) throw ValidationError(fmt::format("'{}' is not an integer", s));
    return v;
}

json to_json(const Table& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < r.size(); ++i)
            std::visit([&](const auto& v) { o[t.columns[i]] = v; }, r[i]);
        rows.push_back(std::move(o));
    }
    return json{{"columns", t.columns}, {"records", std::move(rows)}};
}

void write_text(const fs::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw ValidationError(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError(fmt::format("cannot read '{}'", path.string()));
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_table(const fs::path& stem, const Table& t) {
    write_text(fs::path(stem).replace_extension(".csv"), to_csv(t));
    write_json(fs::path(stem).replace_extension(".json"), to_json(t));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

static_assert(sizeof(double) == 8);

void put_le(std::string& buf, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) buf += static_cast<char>((bits >> (8 * b)) & 0xffu);
}

double get_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_matrix(const fs::path& stem, const Mat& m) {
    const fs::path bin = fs::path(stem).replace_extension(".bin");
    std::string buf;
    buf.reserve(static_cast<std::size_t>(16 * m.size()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            put_le(buf, m(r, c).real());
            put_le(buf, m(r, c).imag());
        }
    write_text(bin, buf);
    write_json(fs::path(stem).replace_extension(".json"),
               json{{"rows", m.rows()},
                    {"cols", m.cols()},
                    {"dtype", "complex128"},
                    {"byte_order", "little"},
                    {"layout", "column-major, (re, im) interleaved"},
                    {"bytes", buf.size()},
                    {"data", bin.filename().string()}});
}

Mat read_matrix(const fs::path& stem) {
    const json h = json::parse(read_text(fs::path(stem).replace_extension(".json")));
    const auto rows = h.at("rows").get<Eigen::Index>(), cols = h.at("cols").get<Eigen::Index>();
    if (h.at("dtype") != "complex128" || h.at("byte_order") != "little")
        throw ValidationError("unsupported matrix encoding");
    const std::string buf = read_text(fs::path(stem).parent_path() / h.at("data").get<std::string>());
    if (buf.size() != static_cast<std::size_t>(16 * rows * cols))
        throw ValidationError(fmt::format("matrix blob has {} bytes, expected {}", buf.size(), 16 * rows * cols));
    Mat m(rows, cols);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r, p += 16) m(r, c) = cplx(get_le(p), get_le(p + 8));
    return m;
}

NoiseParams RunConfig::noise() const { return explicit_rates ? rates : bias_rates(eta); }

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw ValidationError(fmt::format("{} must be an object", where));
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(fmt::format("unknown key '{}' in {}", key, where));
    }
}

template <class T>
void read_field(const json& j, const char* key, T& out, std::string_view where) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ValidationError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ValidationError("");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ValidationError("");
        } else {
            if (!v.is_string()) throw ValidationError("");
        }
        out = v.get<T>();
    } catch (const std::exception&) {
        throw ValidationError(fmt::format("'{}' in {} has the wrong type", key, where));
    }
}

// Integer or the string "auto" (stored as -1).
void read_auto(const json& j, const char* key, int& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "auto") {
        out = -1;
    } else if (v.is_number_integer() && v.get<int>() >= 0) {
        out = v.get<int>();
    } else {
        throw ValidationError(fmt::format("decoder.{} must be a non-negative integer or \"auto\"", key));
    }
}

json auto_value(int v) { return v < 0 ? json("auto") : json(v); }

}  // namespace

RunConfig parse_run_config(const json& j) {
    RunConfig c;
    reject_unknown(j, {"experiment", "units", "code", "noise", "decoder", "solver", "output_dir", "seed", "threads",
                       "params", "generated_by"},
                   "config");
    read_field(j, "experiment", c.experiment, "config");
    if (j.contains("units")) {
        const auto u = j.at("units");
        if (u == "a")
            c.units = UnitSystem::a;
        else if (u == "gamma_tot")
            c.units = UnitSystem::gamma_tot;
        else
            throw ValidationError("units must be \"a\" or \"gamma_tot\"");
    }
    if (j.contains("code")) {
        const json& code = j.at("code");
        reject_unknown(code, {"N", "I"}, "code");
        read_field(code, "N", c.n_components, "code");
        read_field(code, "I", c.spin, "code");
    }
    if (j.contains("noise")) {
        const json& n = j.at("noise");
        reject_unknown(n, {"eta", "rates"}, "noise");
        if (n.contains("eta") && n.contains("rates")) throw ValidationError("noise takes eta or rates, not both");
        read_field(n, "eta", c.eta, "noise");
        if (n.contains("rates")) {
            const json& r = n.at("rates");
            reject_unknown(r, {"gamma_plus", "gamma_minus", "gamma_z"}, "noise.rates");
            c.explicit_rates = true;
            read_field(r, "gamma_plus", c.rates.gamma_plus, "noise.rates");
            read_field(r, "gamma_minus", c.rates.gamma_minus, "noise.rates");
            read_field(r, "gamma_z", c.rates.gamma_z, "noise.rates");
        }
    }
    if (j.contains("decoder")) {
        const json& d = j.at("decoder");
        reject_unknown(d, {"k", "l"}, "decoder");
        read_auto(d, "k", c.k);
        read_auto(d, "l", c.l);
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        reject_unknown(s, {"step_norm", "trace_tol", "max_halvings", "symmetrize"}, "solver");
        read_field(s, "step_norm", c.solver.step_norm, "solver");
        read_field(s, "trace_tol", c.solver.trace_tol, "solver");
        read_field(s, "max_halvings", c.solver.max_halvings, "solver");
        read_field(s, "symmetrize", c.solver.symmetrize, "solver");
    }
    read_field(j, "output_dir", c.output_dir, "config");
    read_field(j, "seed", c.seed, "config");
    read_field(j, "threads", c.threads, "config");
    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw ValidationError("params must be an object");
        c.params = j.at("params");
    }

    if (c.n_components < 2 || c.n_components % 4 != 2) throw ValidationError("code.N must be >= 2 and = 2 mod 4");
    if (c.spin < 1) throw ValidationError("code.I must be a positive integer");
    if (!(c.eta > 0.0)) throw ValidationError("noise.eta must be positive");
    if (c.explicit_rates && (c.rates.gamma_plus < 0 || c.rates.gamma_minus < 0 || c.rates.gamma_z < 0))
        throw ValidationError("noise rates must be non-negative");
    if (!(c.solver.step_norm > 0.0) || !(c.solver.trace_tol > 0.0) || c.solver.max_halvings < 0)
        throw ValidationError("solver options out of range");
    if (c.threads < 0) throw ValidationError("threads must be >= 0");
    return c;
}

json resolved_config(const RunConfig& c) {
    json noise = json::object();
    if (c.explicit_rates)
        noise["rates"] = {{"gamma_plus", c.rates.gamma_plus},
                          {"gamma_minus", c.rates.gamma_minus},
                          {"gamma_z", c.rates.gamma_z}};
    else
        noise["eta"] = c.eta;
    return json{{"experiment", c.experiment},
                {"units", c.units == UnitSystem::a ? "a" : "gamma_tot"},
                {"code", {{"N", c.n_components}, {"I", c.spin}}},
                {"noise", noise},
                {"decoder", {{"k", auto_value(c.k)}, {"l", auto_value(c.l)}}},
                {"solver",
                 {{"step_norm", c.solver.step_norm},
                  {"trace_tol", c.solver.trace_tol},
                  {"max_halvings", c.solver.max_halvings},
                  {"symmetrize", c.solver.symmetrize}}},
                {"output_dir", c.output_dir},
                {"seed", c.seed},
                {"threads", c.threads},
                {"params", c.params}};
}

std::string default_output_root() {
    const char* env = std::getenv("SPINCAT_OUT");
    return env && *env ? std::string(env) : std::string("out");
}

namespace {

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "?";
}

Axis axis_from(const json& j) {
    const auto s = j.get<std::string>();
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw ValidationError(fmt::format("bad axis '{}'", s));
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

json circuit_to_json(const Circuit& c) {
    json ops = json::array();
    for (const auto& g : c.ops) {
        json o = std::visit(
            overloaded{
                [](const gate::Theta& x) { return json{{"gate", "Theta"}, {"angle", x.angle}}; },
                [](const gate::CondR& x) {
                    return json{{"gate", "CondR"}, {"axis", axis_name(x.axis)}, {"angle", x.angle}, {"m_set", x.m_set}};
                },
                [](const gate::FlipFlop& x) { return json{{"gate", "FlipFlop"}, {"t", x.t}, {"m", x.m}}; },
                [](const gate::FlipFlip& x) { return json{{"gate", "FlipFlip"}, {"t", x.t}, {"m", x.m}}; },
                [](const gate::Ux& x) { return json{{"gate", "Ux"}, {"angle", x.angle}}; },
                [](const gate::Uy& x) { return json{{"gate", "Uy"}, {"angle", x.angle}}; },
                [](const gate::EnsR& x) {
                    return json{{"gate", "EnsR"}, {"axis", axis_name(x.axis)}, {"angle", x.angle}};
                },
                [](const gate::Pi& x) { return json{{"gate", "Pi"}, {"phi", x.phi}}; },
                [](const gate::FreeEvolve& x) {
                    return json{{"gate", "FreeEvolve"},
                                {"t", x.t},
                                {"h",
                                 {{"omega_e", x.h.omega_e},
                                  {"omega_n", x.h.omega_n},
                                  {"a", x.h.a},
                                  {"a_nc", x.h.a_nc}}}};
                },
                [](const gate::ResetElectron&) { return json{{"gate", "ResetElectron"}}; },
            },
            g);
        ops.push_back(std::move(o));
    }
    return json{{"name", c.name},
                {"note", c.note},
                {"tracked_phase", {c.tracked_phase.real(), c.tracked_phase.imag()}},
                {"ops", std::move(ops)}};
}

Circuit circuit_from_json(const json& j) {
    Circuit c;
    try {
        c.name = j.value("name", "");
        c.note = j.value("note", "");
        if (j.contains("tracked_phase")) c.tracked_phase = cplx(j["tracked_phase"][0], j["tracked_phase"][1]);
        for (const json& o : j.at("ops")) {
            const auto g = o.at("gate").get<std::string>();
            if (g == "Theta")
                c.add(gate::Theta{o.at("angle")});
            else if (g == "CondR")
                c.add(gate::CondR{axis_from(o.at("axis")), o.at("angle"), o.at("m_set").get<MSet>()});
            else if (g == "FlipFlop")
                c.add(gate::FlipFlop{o.at("t"), o.at("m")});
            else if (g == "FlipFlip")
                c.add(gate::FlipFlip{o.at("t"), o.at("m")});
            else if (g == "Ux")
                c.add(gate::Ux{o.at("angle")});
            else if (g == "Uy")
                c.add(gate::Uy{o.at("angle")});
            else if (g == "EnsR")
                c.add(gate::EnsR{axis_from(o.at("axis")), o.at("angle")});
            else if (g == "Pi")
                c.add(gate::Pi{o.at("phi")});
            else if (g == "FreeEvolve") {
                const json& h = o.at("h");
                c.add(gate::FreeEvolve{o.at("t"), {h.at("omega_e"), h.at("omega_n"), h.at("a"), h.at("a_nc")}});
            } else if (g == "ResetElectron")
                c.add(gate::ResetElectron{});
            else
                throw ValidationError(fmt::format("unknown gate '{}'", g));
        }
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed circuit JSON: {}", e.what()));
    }
    return c;
}

}  // namespace spincat::io
