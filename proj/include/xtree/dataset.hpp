#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xtree/error.hpp"

namespace xtree {

struct FeatureEntry {
    std::uint32_t index;
    double value;

    friend bool operator==(const FeatureEntry& a, const FeatureEntry& b) {
        return a.index == b.index && a.value == b.value;
    }
};

// Sparse feature vector: strictly increasing indices below dimension(),
// no explicit zero values.
class SparseVector {
public:
    SparseVector() = default;
    SparseVector(std::vector<FeatureEntry> entries, std::uint32_t dimension);

    // Accepts arbitrary entry order, sums duplicate indices and drops zeros.
    static SparseVector from_unsorted(std::vector<FeatureEntry> entries, std::uint32_t dimension);

    const std::vector<FeatureEntry>& entries() const { return entries_; }
    std::uint32_t dimension() const { return dim_; }
    std::size_t nnz() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    friend bool operator==(const SparseVector& a, const SparseVector& b) {
        return a.dim_ == b.dim_ && a.entries_ == b.entries_;
    }

private:
    std::vector<FeatureEntry> entries_;
    std::uint32_t dim_ = 0;
};

struct Example {
    SparseVector features;
    std::vector<std::uint32_t> labels;  // sorted, unique
    double weight = 1.0;
};

struct Dataset {
    std::vector<Example> examples;
    std::uint32_t num_features = 0;  // d
    std::uint32_t num_labels = 0;    // m

    std::size_t size() const { return examples.size(); }
};

// Throws BoundsError / std::invalid_argument if any example violates the
// dataset dimensions or the Example invariants.
void validate(const Dataset& dataset);

// XMLC repository text format. First line "N d m"; each of the N following
// lines is "l1,l2,... i1:v1 i2:v2 ..." where the comma separated label field
// may be empty (line starting with whitespace, or a first token containing
// ':'). Duplicate feature indices are summed, duplicate labels deduplicated.
Dataset parse_xmlc(std::istream& in);
Dataset load_xmlc(const std::string& path);

// Inverse of parse_xmlc; values printed with 9 significant digits.
void serialize_xmlc(const Dataset& dataset, std::ostream& out);
void save_xmlc(const Dataset& dataset, const std::string& path);

// Smoothed idf: idf[i] = ln((1 + N) / (1 + df_i)) + 1.
std::vector<double> tfidf_fit(const Dataset& dataset);

// Multiplies each stored value by idf[index]; sparsity pattern is preserved.
SparseVector tfidf_transform(const SparseVector& x, const std::vector<double>& idf);

}  // namespace xtree
