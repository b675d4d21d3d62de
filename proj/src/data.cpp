#include "sscl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace sscl {

namespace {

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

bool is_missing(const std::string& cell) { return cell == "?"; }

std::optional<double> parse_real(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

Standardizer Standardizer::identity(int d) {
    return Standardizer{Vector::Zero(d), Vector::Ones(d)};
}

std::vector<int> FoldSplit::test_indices(int fold) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(assignments.size()); ++i)
        if (assignments[i] == fold) out.push_back(i);
    return out;
}

std::vector<int> FoldSplit::train_indices(int fold) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(assignments.size()); ++i)
        if (assignments[i] != fold) out.push_back(i);
    return out;
}

std::vector<int> FoldSplit::fold_sizes() const {
    std::vector<int> sizes(fold_count, 0);
    for (int f : assignments) ++sizes[f];
    return sizes;
}

LabelColumn LabelColumn::parse(const std::string& text) {
    LabelColumn col;
    if (auto v = parse_real(text); v && std::floor(*v) == *v) {
        col.index = static_cast<int>(*v);
    } else if (text == "last") {
        col.index = -1;
    } else if (text == "none") {
        col.absent = true;
    } else {
        col.name = text;
    }
    return col;
}

Dataset parse_csv(const std::string& text, const LabelColumn& label_column, std::string name) {
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;
    {
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            rows.push_back(split_row(line));
            line_numbers.push_back(line_no);
        }
    }
    if (rows.empty()) throw DataError("empty CSV input");

    const int width = static_cast<int>(rows.front().size());
    if (label_column.absent) {
        if (width < 1) throw DataError("CSV needs at least one feature column");
    } else if (width < 2) {
        throw DataError("CSV needs at least one feature column and a label column");
    }

    int label_idx = -1;
    if (label_column.index) {
        label_idx = *label_column.index < 0 ? width + *label_column.index : *label_column.index;
        if (label_idx < 0 || label_idx >= width)
            throw ConfigError("label column " + std::to_string(*label_column.index) + " out of range for " +
                              std::to_string(width) + " columns");
    }

    // A first row with any non-numeric feature cell is a header.
    bool header = false;
    for (int c = 0; c < width; ++c) {
        if (c == label_idx) continue;
        const auto& cell = rows.front()[c];
        if (!is_missing(cell) && !parse_real(cell)) {
            header = true;
            break;
        }
    }
    if (!label_column.absent && !label_column.index) {
        if (!header) throw ConfigError("label column '" + label_column.name + "' requested but CSV has no header");
        auto& head = rows.front();
        auto it = std::find(head.begin(), head.end(), label_column.name);
        if (it == head.end()) throw ConfigError("label column '" + label_column.name + "' not found in header");
        label_idx = static_cast<int>(it - head.begin());
    }

    const std::size_t first = header ? 1 : 0;
    const int n = static_cast<int>(rows.size() - first);
    if (n < 1) throw DataError("CSV has a header but no data rows");

    Dataset ds;
    ds.name = std::move(name);
    ds.features.resize(n, label_idx < 0 ? width : width - 1);
    ds.labels.assign(n, 0);
    std::map<std::string, int> class_ids;

    for (int r = 0; r < n; ++r) {
        const auto& row = rows[first + r];
        const int line_no = line_numbers[first + r];
        if (static_cast<int>(row.size()) != width)
            throw DataError("ragged row at line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " cells, found " + std::to_string(row.size()));
        int feature = 0;
        for (int c = 0; c < width; ++c) {
            if (c == label_idx) {
                auto [it, inserted] = class_ids.emplace(row[c], static_cast<int>(ds.class_names.size()));
                if (inserted) ds.class_names.push_back(row[c]);
                ds.labels[r] = it->second;
                continue;
            }
            if (is_missing(row[c])) {
                ds.features(r, feature++) = std::numeric_limits<double>::quiet_NaN();
            } else if (auto v = parse_real(row[c])) {
                ds.features(r, feature++) = *v;
            } else {
                throw DataError("cannot parse '" + row[c] + "' as a real number at line " + std::to_string(line_no) +
                                ", column " + std::to_string(c + 1));
            }
        }
    }
    return ds;
}

Dataset load_csv(const std::string& path, const LabelColumn& label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw DataError("read failure on '" + path + "'");
    return parse_csv(buf.str(), label_column, path);
}

Dataset make_dataset(Matrix features, std::vector<int> labels, std::string name) {
    if (features.rows() != static_cast<Eigen::Index>(labels.size()))
        throw std::invalid_argument("make_dataset: label count does not match row count");
    if (features.rows() < 1 || features.cols() < 1) throw DataError("dataset must have n >= 1 and d >= 1");
    int max_label = -1;
    for (int y : labels) {
        if (y < 0) throw std::invalid_argument("make_dataset: class ids must be non-negative");
        max_label = std::max(max_label, y);
    }
    Dataset ds;
    ds.features = std::move(features);
    ds.labels = std::move(labels);
    for (int c = 0; c <= max_label; ++c) ds.class_names.push_back(std::to_string(c));
    ds.name = std::move(name);
    return ds;
}

Dataset subset(const Dataset& ds, std::span<const int> indices) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(indices.size()), ds.features.cols());
    out.labels.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(indices[r]);
        out.labels.push_back(ds.labels[indices[r]]);
    }
    out.class_names = ds.class_names;
    out.name = ds.name;
    return out;
}

Standardizer fit_standardizer(const Dataset& train) {
    if (train.n() < 1) throw DataError("cannot fit a standardizer on an empty dataset");
    const int d = train.d();
    Standardizer s{Vector::Zero(d), Vector::Ones(d)};
    for (int j = 0; j < d; ++j) {
        auto col = train.features.col(j);
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (!std::isnan(col[i])) {
                sum += col[i];
                ++count;
            }
        if (count == 0) continue;  // entirely missing: imputes to 0
        const double mean = sum / count;
        double ss = 0.0;
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (!std::isnan(col[i])) ss += (col[i] - mean) * (col[i] - mean);
        const double sd = std::sqrt(ss / count);
        s.mean[j] = mean;
        s.scale[j] = sd < 1e-12 ? 1.0 : sd;
    }
    return s;
}

Vector apply_standardizer(const Standardizer& s, const Vector& x) {
    if (x.size() != s.mean.size()) throw std::invalid_argument("standardizer dimension mismatch");
    Vector out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j)
        out[j] = std::isnan(x[j]) ? 0.0 : (x[j] - s.mean[j]) / s.scale[j];
    return out;
}

Dataset apply_standardizer(const Standardizer& s, const Dataset& ds) {
    if (ds.d() != s.dim()) throw std::invalid_argument("standardizer dimension mismatch");
    Dataset out = ds;
    for (int i = 0; i < ds.n(); ++i)
        out.features.row(i) = apply_standardizer(s, Vector(ds.features.row(i).transpose())).transpose();
    return out;
}

FoldSplit kfold(int n, int fold_count, std::uint64_t seed) {
    if (fold_count < 2 || fold_count > n)
        throw ConfigError("fold count " + std::to_string(fold_count) + " must lie in [2, " + std::to_string(n) + "]");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    FoldSplit split{fold_count, std::vector<int>(n)};
    for (int p = 0; p < n; ++p) split.assignments[order[p]] = p % fold_count;
    return split;
}

FoldSplit stratified_kfold(std::span<const int> labels, int fold_count, std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (fold_count < 2 || fold_count > n)
        throw ConfigError("fold count " + std::to_string(fold_count) + " must lie in [2, " + std::to_string(n) + "]");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return labels[a] < labels[b]; });
    FoldSplit split{fold_count, std::vector<int>(n)};
    for (int p = 0; p < n; ++p) split.assignments[order[p]] = p % fold_count;
    return split;
}

void write_fold_csv(const FoldSplit& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "point_index,fold\n";
    for (std::size_t i = 0; i < split.assignments.size(); ++i) out << i << ',' << split.assignments[i] << '\n';
}

BinaryTask make_binary_task(std::shared_ptr<const Dataset> ds, int positive_class) {
    BinaryTask task;
    task.positive_class = positive_class;
    task.binary_labels.resize(ds->n());
    for (int i = 0; i < ds->n(); ++i) task.binary_labels[i] = ds->labels[i] == positive_class ? 1.0 : -1.0;
    task.dataset = std::move(ds);
    return task;
}

std::vector<BinaryTask> one_vs_rest_tasks(std::shared_ptr<const Dataset> ds) {
    const int classes = std::max(ds->class_count(), *std::max_element(ds->labels.begin(), ds->labels.end()) + 1);
    std::vector<bool> seen(classes, false);
    for (int y : ds->labels) seen[y] = true;
    if (std::count(seen.begin(), seen.end(), true) < 2)
        throw DataError("classification needs at least two distinct classes");
    if (classes == 2) return {make_binary_task(ds, 0)};
    std::vector<BinaryTask> tasks;
    for (int c = 0; c < classes; ++c) tasks.push_back(make_binary_task(ds, c));
    return tasks;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace sscl
