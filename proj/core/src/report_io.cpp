#include "report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pconv/errors.hpp"

namespace pconv::io {

json to_json(const PerturbVariant& v) {
    json j{{"kind", kind_name(v.kind)}, {"ratio", v.ratio}};
    if (v.kind == PerturbKind::sdrop_random_ratio) j["halfwidth"] = v.halfwidth;
    return j;
}

json to_json(const ModeCoverageReport& r) {
    return json{{"schema", kSchemaVersion},         {"covered_modes", r.covered_modes},
                {"n_samples", r.n_samples},         {"threshold", r.threshold},
                {"hq_fraction", r.hq_fraction},     {"nearest_counts", r.nearest_counts},
                {"hq_counts", r.hq_counts}};
}

json to_json(const MemorizationReport& r) {
    return json{{"schema", kSchemaVersion}, {"train_real_acc", r.train_real_acc}, {"test_real_acc", r.test_real_acc},
                {"gap", r.gap},             {"n_train", r.n_train},               {"n_test", r.n_test}};
}

json to_json(const DeltaYReport& r) {
    json j{{"schema", kSchemaVersion},
           {"variant", to_json(r.variant)},
           {"n", r.n},
           {"selected", r.selected},
           {"exhaustive", r.exhaustive},
           {"evaluations", r.evaluations},
           {"empirical_min", r.empirical_min},
           {"empirical_max", r.empirical_max},
           {"empirical_min_abs", r.empirical_min_abs},
           {"empirical_max_abs", r.empirical_max_abs}};
    j["analytic_min"] = r.analytic_min ? json(*r.analytic_min) : json(nullptr);
    j["analytic_max"] = r.analytic_max ? json(*r.analytic_max) : json(nullptr);
    j["x_hat_min"] = r.x_hat_min;
    j["x_hat_max"] = r.x_hat_max;
    return j;
}

json to_json(const ProbMap& p) {
    return json{{"schema", kSchemaVersion},
                {"variant", to_json(p.variant)},
                {"n_samples", p.n_samples},
                {"grid", ProbMap::kGrid},
                {"lo", ProbMap::kLo},
                {"hi", ProbMap::kHi},
                {"occupied_cells", p.occupied()}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << text;
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string probmap_csv(const ProbMap& p) {
    std::ostringstream os;
    for (std::size_t y = 0; y < ProbMap::kGrid; ++y) {
        for (std::size_t x = 0; x < ProbMap::kGrid; ++x) {
            os << (x ? "," : "") << p.counts[y * ProbMap::kGrid + x];
        }
        os << '\n';
    }
    return os.str();
}

namespace {

constexpr double kSize = 400.0;
constexpr double kMargin = 30.0;

std::string svg_open(const std::string& title) {
    std::ostringstream os;
    const double full = kSize + 2 * kMargin;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << full << "\" height=\"" << full
       << "\" viewBox=\"0 0 " << full << ' ' << full << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 10 << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << title << "</text>\n"
       << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize << "\" height=\"" << kSize
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    return os.str();
}

}  // namespace

std::string svg_scatter(const Tensor& points, const std::vector<std::array<double, 2>>& centers, double lo, double hi,
                        const std::string& title) {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed << svg_open(title);
    auto px = [&](double v) { return kMargin + (v - lo) / (hi - lo) * kSize; };
    auto py = [&](double v) { return kMargin + (hi - v) / (hi - lo) * kSize; };
    // Axes through the origin when visible.
    if (lo < 0.0 && hi > 0.0) {
        os << "<line x1=\"" << kMargin << "\" y1=\"" << py(0) << "\" x2=\"" << kMargin + kSize << "\" y2=\"" << py(0)
           << "\" stroke=\"#bbb\"/>\n"
           << "<line x1=\"" << px(0) << "\" y1=\"" << kMargin << "\" x2=\"" << px(0) << "\" y2=\"" << kMargin + kSize
           << "\" stroke=\"#bbb\"/>\n";
    }
    for (const auto& c : centers) {
        os << "<circle cx=\"" << px(c[0]) << "\" cy=\"" << py(c[1]) << "\" r=\"5\" fill=\"none\" stroke=\"red\"/>\n";
    }
    const std::size_t n = points.rank() == 2 ? points.extent(0) : 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::clamp(points.at(i, 0), lo, hi), y = std::clamp(points.at(i, 1), lo, hi);
        os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"1\" fill=\"#1f4e9c\" fill-opacity=\"0.4\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_heatmap(const ProbMap& p, const std::string& title) {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed << svg_open(title);
    const std::size_t g = ProbMap::kGrid;
    const double cell = kSize / static_cast<double>(g);
    const std::size_t peak = *std::max_element(p.counts.begin(), p.counts.end());
    for (std::size_t y = 0; y < g; ++y)
        for (std::size_t x = 0; x < g; ++x) {
            const std::size_t c = p.counts[y * g + x];
            if (c == 0) continue;
            const double t = std::log1p(static_cast<double>(c)) / std::log1p(static_cast<double>(peak));
            const int shade = static_cast<int>(std::lround(230.0 * (1.0 - t)));
            os << "<rect x=\"" << kMargin + static_cast<double>(x) * cell << "\" y=\""
               << kMargin + static_cast<double>(g - 1 - y) * cell << "\" width=\"" << cell << "\" height=\"" << cell
               << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade << ")\"/>\n";
        }
    os << "</svg>\n";
    return os.str();
}

Tensor read_csv_matrix(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::vector<double> data;
    std::size_t cols = 0, rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows == 0 && data.empty()) continue;  // header
            throw IoError("'" + path.string() + "' has a non-numeric row " + std::to_string(rows + 1));
        }
        if (rows == 0) cols = row.size();
        if (row.size() != cols) throw IoError("'" + path.string() + "' has ragged rows");
        data.insert(data.end(), row.begin(), row.end());
        ++rows;
    }
    return Tensor(Shape{rows, cols}, std::move(data));
}

std::string matrix_csv(const Tensor& m) {
    std::ostringstream os;
    os.precision(17);
    const std::size_t rows = m.rank() ? m.extent(0) : 0;
    const std::size_t cols = rows ? m.size() / rows : 0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) os << (j ? "," : "") << m[i * cols + j];
        os << '\n';
    }
    return os.str();
}

}  // namespace pconv::io
