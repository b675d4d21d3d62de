#pragma once

#include "sscl/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sscl {

/// Feature matrix (one row per point) plus dense class ids.
///
/// Cells read as "?" are stored as NaN until a Standardizer imputes them.
struct Dataset {
    Matrix features;                       // n x d
    std::vector<int> labels;               // n dense class ids
    std::vector<std::string> class_names;  // class id -> original label text
    std::string name;

    int n() const { return static_cast<int>(features.rows()); }
    int d() const { return static_cast<int>(features.cols()); }
    int class_count() const { return static_cast<int>(class_names.size()); }
    bool has_missing() const { return features.hasNaN(); }
};

/// One-vs-rest view of a dataset. binary_labels[i] is +1 iff labels[i] == positive_class.
struct BinaryTask {
    std::shared_ptr<const Dataset> dataset;
    int positive_class = 0;
    Vector binary_labels;
};

struct Standardizer {
    Vector mean;
    Vector scale;

    int dim() const { return static_cast<int>(mean.size()); }
    static Standardizer identity(int d);
};

struct FoldSplit {
    int fold_count = 0;
    std::vector<int> assignments;

    std::vector<int> test_indices(int fold) const;
    std::vector<int> train_indices(int fold) const;
    std::vector<int> fold_sizes() const;
};

/// Label column selector: a 0-based index (negative counts from the end), a
/// header name, or "none" for unlabelled rows (every label 0, no class table).
struct LabelColumn {
    std::optional<int> index;
    std::string name;
    bool absent = false;

    static LabelColumn parse(const std::string& text);
};

Dataset load_csv(const std::string& path, const LabelColumn& label_column);
Dataset parse_csv(const std::string& text, const LabelColumn& label_column, std::string name = {});

/// Builds a dataset from in-memory values; labels must be dense ids in [0, class_count).
Dataset make_dataset(Matrix features, std::vector<int> labels, std::string name = {});

/// Rows `indices` of `ds`, keeping the class table.
Dataset subset(const Dataset& ds, std::span<const int> indices);

Standardizer fit_standardizer(const Dataset& train);
Dataset apply_standardizer(const Standardizer& s, const Dataset& ds);
Vector apply_standardizer(const Standardizer& s, const Vector& x);

FoldSplit kfold(int n, int fold_count, std::uint64_t seed);
/// Per-class shuffled round-robin; fold sizes still differ by at most one.
FoldSplit stratified_kfold(std::span<const int> labels, int fold_count, std::uint64_t seed);
void write_fold_csv(const FoldSplit& split, const std::string& path);

std::vector<BinaryTask> one_vs_rest_tasks(std::shared_ptr<const Dataset> ds);
BinaryTask make_binary_task(std::shared_ptr<const Dataset> ds, int positive_class);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace sscl
