#pragma once

#include "spincat/gates.hpp"
#include "spincat/lindblad.hpp"
#include "spincat/noise.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spincat::io {

using json = nlohmann::ordered_json;

// Bad user input: malformed config, unknown keys, out-of-range parameters, unwritable output.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, long long, std::string>;

// Homogeneous records: every row has one cell per column. Column names carry units, e.g.
// "tau_max[1/gamma_tot]".
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    Table() = default;
    explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}
    void add(std::vector<Cell> row);
    std::size_t column(std::string_view name) const;
};

// Doubles are written with 17 significant digits so they read back bit-exact.
std::string format_cell(const Cell& c);
// RFC-4180: CRLF records, fields quoted when they hold a comma, quote, CR or LF.
std::string to_csv(const Table& t);
// Parsed cells are strings; use as_double / as_int to read numbers back.
Table parse_csv(std::string_view text);
double as_double(const Cell& c);
long long as_int(const Cell& c);

json to_json(const Table& t);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);
void write_table(const std::filesystem::path& stem, const Table& t);  // stem.csv and stem.json
void write_json(const std::filesystem::path& path, const json& j);

// Complex matrix as stem.json header plus stem.bin: column-major, (re, im) float64 pairs,
// little-endian, 16 rows*cols bytes.
void write_matrix(const std::filesystem::path& stem, const Mat& m);
Mat read_matrix(const std::filesystem::path& stem);

enum class UnitSystem { a, gamma_tot };

struct RunConfig {
    std::string experiment = "run";
    UnitSystem units = UnitSystem::a;
    int n_components = 6;
    int spin = 30;
    double eta = 10.0;
    bool explicit_rates = false;  // use rates instead of eta
    NoiseParams rates{};
    int k = -1;  // -1: "auto"
    int l = -1;
    SolverOptions solver{};
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int threads = 0;  // 0: OpenMP default
    json params = json::object();  // subcommand parameters, validated by the subcommand

    NoiseParams noise() const;
};

// Rejects unknown keys and wrongly typed values; missing keys keep their defaults.
RunConfig parse_run_config(const json& j);
// Every field spelled out, including defaults.
json resolved_config(const RunConfig& c);
// Default output root: $SPINCAT_OUT when set, else "out".
std::string default_output_root();

json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const json& j);

}  // namespace spincat::io
