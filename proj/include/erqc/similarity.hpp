#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "erqc/core.hpp"

namespace erqc {

// Lowercased alphanumeric runs, deduplicated and sorted.
std::vector<std::string> tokenize(std::string_view text);

double jaccard_tokens(std::string_view a, std::string_view b);

// Jaro similarity with the Winkler prefix boost (scaling 0.1, prefix capped at 4).
double jaro(std::string_view a, std::string_view b);
double jaro_winkler(std::string_view a, std::string_view b);

enum class Measure { jaccard_tokens, jaro_winkler };

std::optional<Measure> parse_measure(std::string_view text);

struct RecordTable {
  std::vector<std::string> attributes;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> values;  // values[record][attribute]

  std::size_t size() const noexcept { return ids.size(); }
  std::optional<std::size_t> attribute_index(std::string_view name) const;
  std::optional<std::size_t> record_index(std::string_view id) const;
  const std::string& value(std::size_t record, std::string_view attribute) const;
};

// Record CSV: header `id,attr1,attr2,...`.
RecordTable read_records(const std::string& path);
RecordTable read_records(std::istream& in, const std::string& source_name = "<stream>");

struct AttributeRule {
  std::string attribute;
  Measure measure = Measure::jaccard_tokens;
  double weight = 1.0;
};

struct SimilarityConfig {
  std::vector<AttributeRule> rules;
  double blocking_threshold = 0.0;
  // Restrict candidates to pairs sharing a token when that cannot drop a pair
  // at or above the threshold.
  bool token_prefilter = false;

  // Weights rescaled to sum to one; throws ConfigError on an unusable config.
  SimilarityConfig normalized() const;
};

double aggregate_similarity(const RecordTable& table_a, std::size_t record_a,
                            const RecordTable& table_b, std::size_t record_b,
                            const SimilarityConfig& config);

struct DerivedWeights {
  std::vector<double> weights;  // aligned with the requested attributes
  std::vector<std::string> warnings;
};

// Weight of each attribute proportional to its number of distinct non-empty
// values across both tables.
DerivedWeights derive_weights(const RecordTable& table_a, const RecordTable& table_b,
                              const std::vector<std::string>& attributes);

using GoldPairs = std::set<std::pair<std::string, std::string>>;

// Gold mapping CSV: `id_a,id_b` per true match.
GoldPairs read_gold(const std::string& path);

std::string pair_id(std::string_view id_a, std::string_view id_b);
std::optional<std::pair<std::string, std::string>> split_pair_id(std::string_view pair_id);

struct BlockedWorkload {
  Workload workload;
  std::size_t candidate_pairs = 0;  // pairs scored before thresholding
};

/// Scores cross-table pairs and keeps those with aggregate similarity at or
/// above the blocking threshold. Ground truth is attached when `gold` is given.
BlockedWorkload block(const RecordTable& table_a, const RecordTable& table_b,
                      const SimilarityConfig& config, const GoldPairs* gold = nullptr,
                      std::size_t subset_size = Workload::kDefaultSubsetSize);

}  // namespace erqc
