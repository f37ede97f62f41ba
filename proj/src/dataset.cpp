#include "xtree/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace xtree {

SparseVector::SparseVector(std::vector<FeatureEntry> entries, std::uint32_t dimension)
    : entries_(std::move(entries)), dim_(dimension) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].index >= dim_)
            throw BoundsError("feature index " + std::to_string(entries_[i].index) +
                              " >= dimension " + std::to_string(dim_));
        if (i > 0 && entries_[i - 1].index >= entries_[i].index)
            throw std::invalid_argument("sparse vector indices must be strictly increasing");
        if (entries_[i].value == 0.0)
            throw std::invalid_argument("sparse vector must not store zero values");
    }
}

SparseVector SparseVector::from_unsorted(std::vector<FeatureEntry> entries, std::uint32_t dimension) {
    std::sort(entries.begin(), entries.end(),
              [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
    std::vector<FeatureEntry> merged;
    merged.reserve(entries.size());
    for (const auto& e : entries) {
        if (!merged.empty() && merged.back().index == e.index)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const FeatureEntry& e) { return e.value == 0.0; });
    return SparseVector(std::move(merged), dimension);
}

void validate(const Dataset& dataset) {
    for (const auto& ex : dataset.examples) {
        if (ex.features.dimension() != dataset.num_features)
            throw std::invalid_argument("example feature dimension does not match dataset");
        if (ex.weight <= 0.0)
            throw std::invalid_argument("example weight must be positive");
        for (std::size_t i = 0; i < ex.labels.size(); ++i) {
            if (ex.labels[i] >= dataset.num_labels)
                throw BoundsError("label " + std::to_string(ex.labels[i]) + " >= m");
            if (i > 0 && ex.labels[i - 1] >= ex.labels[i])
                throw std::invalid_argument("labels must be sorted and unique");
        }
    }
}

namespace {

bool parse_u32(std::string_view token, std::uint32_t& out) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

bool parse_f64(std::string_view token, double& out) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

}  // namespace

Dataset parse_xmlc(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    auto header = split_ws(line);
    std::uint32_t n = 0, d = 0, m = 0;
    if (header.size() != 3 || !parse_u32(header[0], n) || !parse_u32(header[1], d) ||
        !parse_u32(header[2], m))
        throw ParseError(1, "header must be \"N d m\"");

    Dataset ds;
    ds.num_features = d;
    ds.num_labels = m;
    ds.examples.reserve(n);

    for (std::uint32_t r = 0; r < n; ++r) {
        ++lineno;
        if (!std::getline(in, line)) throw ParseError(lineno, "unexpected end of file");
        bool leading_ws =
            !line.empty() && std::isspace(static_cast<unsigned char>(line.front()));
        auto tokens = split_ws(line);

        Example ex;
        std::size_t first_feature = 0;
        if (!leading_ws && !tokens.empty() &&
            tokens[0].find(':') == std::string_view::npos) {
            first_feature = 1;
            std::string_view field = tokens[0];
            while (!field.empty()) {
                std::size_t comma = field.find(',');
                std::string_view tok = field.substr(0, comma);
                std::uint32_t label = 0;
                if (!parse_u32(tok, label))
                    throw ParseError(lineno, "bad label token \"" + std::string(tok) + "\"");
                if (label >= m)
                    throw BoundsError("label " + std::to_string(label) + " >= m", lineno);
                ex.labels.push_back(label);
                if (comma == std::string_view::npos) break;
                field.remove_prefix(comma + 1);
            }
            std::sort(ex.labels.begin(), ex.labels.end());
            ex.labels.erase(std::unique(ex.labels.begin(), ex.labels.end()), ex.labels.end());
        }

        std::vector<FeatureEntry> entries;
        entries.reserve(tokens.size() - first_feature);
        for (std::size_t t = first_feature; t < tokens.size(); ++t) {
            std::string_view tok = tokens[t];
            std::size_t colon = tok.find(':');
            if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
                throw ParseError(lineno, "bad feature token \"" + std::string(tok) + "\"");
            std::uint32_t idx = 0;
            double value = 0.0;
            if (!parse_u32(tok.substr(0, colon), idx) || !parse_f64(tok.substr(colon + 1), value))
                throw ParseError(lineno, "bad feature token \"" + std::string(tok) + "\"");
            if (idx >= d)
                throw BoundsError("feature index " + std::to_string(idx) + " >= d", lineno);
            entries.push_back({idx, value});
        }
        ex.features = SparseVector::from_unsorted(std::move(entries), d);
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

Dataset load_xmlc(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_xmlc(in);
}

void serialize_xmlc(const Dataset& dataset, std::ostream& out) {
    out << dataset.examples.size() << ' ' << dataset.num_features << ' ' << dataset.num_labels
        << '\n';
    char buf[64];
    for (const auto& ex : dataset.examples) {
        for (std::size_t i = 0; i < ex.labels.size(); ++i) {
            if (i) out << ',';
            out << ex.labels[i];
        }
        for (const auto& e : ex.features.entries()) {
            std::snprintf(buf, sizeof(buf), "%.9g", e.value);
            out << ' ' << e.index << ':' << buf;
        }
        out << '\n';
    }
}

void save_xmlc(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    serialize_xmlc(dataset, out);
}

std::vector<double> tfidf_fit(const Dataset& dataset) {
    if (dataset.examples.empty()) throw std::invalid_argument("tfidf_fit: empty dataset");
    std::vector<std::size_t> df(dataset.num_features, 0);
    for (const auto& ex : dataset.examples)
        for (const auto& e : ex.features.entries()) ++df[e.index];
    const double n1 = 1.0 + static_cast<double>(dataset.examples.size());
    std::vector<double> idf(dataset.num_features);
    for (std::uint32_t i = 0; i < dataset.num_features; ++i)
        idf[i] = std::log(n1 / (1.0 + static_cast<double>(df[i]))) + 1.0;
    return idf;
}

SparseVector tfidf_transform(const SparseVector& x, const std::vector<double>& idf) {
    if (x.dimension() != idf.size())
        throw std::invalid_argument("tfidf_transform: dimension mismatch");
    std::vector<FeatureEntry> entries = x.entries();
    for (auto& e : entries) e.value *= idf[e.index];
    return SparseVector(std::move(entries), x.dimension());
}

}  // namespace xtree
