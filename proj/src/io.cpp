#include "mlrem/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mlrem/errors.hpp"

namespace mlrem {

namespace {

constexpr char kMagic[8] = {'M', 'L', 'R', 'D', 'A', 'T', 'A', '1'};

std::string field(std::string_view where, std::string_view name) {
    return std::string(where) + "." + std::string(name);
}

Json vector_json(const Vector& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) {
        arr.push_back(std::isfinite(v[i]) ? Json(v[i]) : Json(nullptr));
    }
    return arr;
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        rows.push_back(vector_json(m.row(r).transpose()));
    }
    return rows;
}

double number_at(const Json& j, const std::string& name) {
    if (!j.is_number()) {
        throw ConfigError(name + ": expected a number");
    }
    return j.get<double>();
}

// Little-endian byte IO, independent of host order.
template <typename U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    }
    out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) {
        throw IoError("dataset file truncated");
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(bytes[i]) << (8 * i);
    }
    return value;
}

void put_double(std::ostream& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    put_le(out, bits);
}

double get_double(std::istream& in) {
    const auto bits = get_le<std::uint64_t>(in);
    double value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return cells;
}

template <typename T>
T parse_cell(std::string_view cell, std::size_t line_no) {
    T value{};
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ConfigError("csv line " + std::to_string(line_no) + ": cannot parse '" + std::string(cell) + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

Json params_to_json(const MixtureParams& params) {
    return Json{{"betas", matrix_json(params.betas)}, {"weights", vector_json(params.weights)}, {"sigma", params.sigma}};
}

MixtureParams params_from_json(const Json& j, std::string_view where) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + ": expected an object");
    }
    for (const char* key : {"betas", "weights", "sigma"}) {
        if (!j.contains(key)) {
            throw ConfigError(field(where, key) + ": missing");
        }
    }
    const Json& betas = j.at("betas");
    if (!betas.is_array() || betas.empty() || !betas.at(0).is_array() || betas.at(0).empty()) {
        throw ConfigError(field(where, "betas") + ": expected a nonempty array of nonempty arrays");
    }
    const auto k = static_cast<Index>(betas.size());
    const auto d = static_cast<Index>(betas.at(0).size());
    MixtureParams params;
    params.betas.resize(k, d);
    for (Index r = 0; r < k; ++r) {
        const Json& row = betas.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Index>(row.size()) != d) {
            throw ConfigError(field(where, "betas") + ": rows must all have length " + std::to_string(d));
        }
        for (Index c = 0; c < d; ++c) {
            params.betas(r, c) = number_at(row.at(static_cast<std::size_t>(c)), field(where, "betas"));
        }
    }
    const Json& weights = j.at("weights");
    if (!weights.is_array() || static_cast<Index>(weights.size()) != k) {
        throw ConfigError(field(where, "weights") + ": expected " + std::to_string(k) + " numbers");
    }
    params.weights.resize(k);
    for (Index r = 0; r < k; ++r) {
        params.weights[r] = number_at(weights.at(static_cast<std::size_t>(r)), field(where, "weights"));
    }
    params.sigma = number_at(j.at("sigma"), field(where, "sigma"));

    if ((params.weights.array() < 0.0).any() || std::abs(params.weights.sum() - 1.0) > 1e-12) {
        throw ConfigError(field(where, "weights") + ": must be nonnegative and sum to 1 (sum=" +
                          format_double(params.weights.sum()) + ")");
    }
    if (!(params.sigma >= 0.0) || !std::isfinite(params.sigma)) {
        throw ConfigError(field(where, "sigma") + ": must be finite and >= 0");
    }
    params.validate();
    return params;
}

Json state_to_json(const EMState& state) {
    return Json{{"betas", matrix_json(state.betas)}, {"weights", vector_json(state.weights)}};
}

Json matched_error_to_json(const MatchedError& err) {
    return Json{{"permutation", err.permutation},
                {"max_beta_err", err.max_beta_err},
                {"sum_beta_err", err.sum_beta_err},
                {"per_component_beta_err", vector_json(err.per_component_beta_err)},
                {"max_rel_weight_err", err.max_rel_weight_err}};
}

Json event_stats_to_json(const EventStats& stats) {
    return Json{{"reference", stats.reference},
                {"tau", vector_json(stats.tau)},
                {"p_e1", vector_json(stats.p_e1)},
                {"p_e2", vector_json(stats.p_e2)},
                {"p_e3", vector_json(stats.p_e3)},
                {"p_good", vector_json(stats.p_good)},
                {"max_dw_good", vector_json(stats.max_dw_good)},
                {"bound_dw", vector_json(stats.bound_dw)},
                {"origin_count", stats.origin_count},
                {"good_count", stats.good_count}};
}

Json condition_report_to_json(const ConditionReport& report) {
    return Json{{"snr", report.snr},
                {"snr_threshold", report.snr_threshold},
                {"init_beta_radius", report.init_beta_radius},
                {"init_beta_bound", report.init_beta_bound},
                {"init_weight_ok", report.init_weight_ok},
                {"satisfied", report.satisfied},
                {"constants", {{"C", report.constants_used.big_c}, {"c", report.constants_used.small_c}}}};
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
    data.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(kMagic, sizeof kMagic);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(data.n()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(data.d()));
    put_le<std::uint64_t>(out, data.seed);
    put_le<std::uint8_t>(out, data.labels ? 1 : 0);
    for (Index i = 0; i < data.n(); ++i) {
        for (Index c = 0; c < data.d(); ++c) {
            put_double(out, data.samples.design(i, c));
        }
    }
    for (Index i = 0; i < data.n(); ++i) {
        put_double(out, data.samples.response[i]);
    }
    if (data.labels) {
        for (int label : *data.labels) {
            put_le<std::uint32_t>(out, static_cast<std::uint32_t>(label));
        }
    }
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw IoError(path.string() + ": not a dataset container");
    }
    const auto n = static_cast<Index>(get_le<std::uint64_t>(in));
    const auto d = static_cast<Index>(get_le<std::uint64_t>(in));
    Dataset data;
    data.seed = get_le<std::uint64_t>(in);
    const bool has_labels = get_le<std::uint8_t>(in) != 0;
    data.samples.design.resize(n, d);
    data.samples.response.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < d; ++c) {
            data.samples.design(i, c) = get_double(in);
        }
    }
    for (Index i = 0; i < n; ++i) {
        data.samples.response[i] = get_double(in);
    }
    if (has_labels) {
        data.labels.emplace(static_cast<std::size_t>(n));
        for (auto& label : *data.labels) {
            label = static_cast<int>(static_cast<std::int32_t>(get_le<std::uint32_t>(in)));
        }
    }
    return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    data.validate();
    for (Index c = 0; c < data.d(); ++c) {
        out << 'x' << c << ',';
    }
    out << 'y' << (data.labels ? ",label" : "") << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        for (Index c = 0; c < data.d(); ++c) {
            out << format_double(data.samples.design(i, c)) << ',';
        }
        out << format_double(data.samples.response[i]);
        if (data.labels) {
            out << ',' << (*data.labels)[static_cast<std::size_t>(i)];
        }
        out << '\n';
    }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_dataset_csv(out, data);
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("csv: missing header");
    }
    const auto header = split_line(line);
    bool has_labels = !header.empty() && header.back() == "label";
    const std::size_t width = header.size();
    const std::size_t d = width - (has_labels ? 2 : 1);
    if (width < 2 || header[d] != "y") {
        throw ConfigError("csv: header must be x0,...,x{d-1},y[,label]");
    }
    for (std::size_t c = 0; c < d; ++c) {
        if (header[c] != "x" + std::to_string(c)) {
            throw ConfigError("csv: header column " + std::to_string(c) + " must be x" + std::to_string(c));
        }
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = split_line(line);
        if (cells.size() != width) {
            throw ConfigError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                              " columns");
        }
        for (std::size_t c = 0; c <= d; ++c) {
            values.push_back(parse_cell<double>(cells[c], line_no));
        }
        if (has_labels) {
            labels.push_back(parse_cell<int>(cells.back(), line_no));
        }
    }
    const auto n = static_cast<Index>(values.size() / (d + 1));
    if (n == 0) {
        throw ConfigError("csv: no data rows");
    }
    Dataset data;
    data.samples.design.resize(n, static_cast<Index>(d));
    data.samples.response.resize(n);
    for (Index i = 0; i < n; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * (d + 1);
        for (std::size_t c = 0; c < d; ++c) {
            data.samples.design(i, static_cast<Index>(c)) = values[base + c];
        }
        data.samples.response[i] = values[base + d];
    }
    if (has_labels) {
        data.labels = std::move(labels);
    }
    return data;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_dataset_csv(in);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, const MixtureParams* truth,
                     std::string_view estimator) {
    if (trace.states.empty()) {
        return;
    }
    const Index d = trace.states.front().d();
    const Index k = trace.states.front().k();
    out << "iter,component";
    for (Index c = 0; c < d; ++c) {
        out << ",beta_" << c;
    }
    out << ",pi" << (truth ? ",matched_error" : "") << ",degenerate_flag,estimator\n";

    // Rows follow the estimate's own component order; matched_error compares
    // against the truth component assigned at iteration 0.
    std::vector<int> truth_of(static_cast<std::size_t>(k));
    if (truth) {
        const auto perm = matched_error(trace.states.front(), *truth).permutation;
        for (Index j = 0; j < k; ++j) {
            truth_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = static_cast<int>(j);
        }
    }
    for (std::size_t t = 0; t < trace.states.size(); ++t) {
        const EMState& state = trace.states[t];
        for (Index j = 0; j < k; ++j) {
            out << t << ',' << j;
            for (Index c = 0; c < d; ++c) {
                out << ',' << format_double(state.betas(j, c));
            }
            out << ',' << format_double(state.weights[j]);
            if (truth) {
                const int target = truth_of[static_cast<std::size_t>(j)];
                out << ',' << format_double((state.betas.row(j) - truth->betas.row(target)).norm());
            }
            const bool flag = t > 0 && trace.degenerate[t - 1][static_cast<std::size_t>(j)];
            out << ',' << (flag ? 1 : 0) << ',' << estimator << '\n';
        }
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

}  // namespace mlrem
