#include "erqc/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "erqc/csv.hpp"
#include "erqc/errors.hpp"

namespace erqc {
namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

template <typename Sorted>
double sorted_jaccard(const Sorted& a, const Sorted& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_alnum(c)) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double jaccard_tokens(std::string_view a, std::string_view b) {
  return sorted_jaccard(tokenize(a), tokenize(b));
}

double jaro(std::string_view a, std::string_view b) {
  // Canonical argument order keeps the greedy matching symmetric.
  if (a.size() > b.size() || (a.size() == b.size() && a > b)) std::swap(a, b);
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty()) return 0.0;

  const std::size_t window = b.size() / 2 > 0 ? b.size() / 2 - 1 : 0;
  std::vector<char> a_hit(a.size(), 0);
  std::vector<char> b_hit(b.size(), 0);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_hit[j] && a[i] == b[j]) {
        a_hit[i] = b_hit[j] = 1;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < a.size(); ++i) {
    if (!a_hit[i]) continue;
    while (!b_hit[j]) ++j;
    if (a[i] != b[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions / 2);
  return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
  constexpr std::size_t kMaxPrefix = 4;
  constexpr double kScaling = 0.1;
  const double j = jaro(a, b);
  std::size_t prefix = 0;
  const std::size_t limit = std::min({a.size(), b.size(), kMaxPrefix});
  while (prefix < limit && a[prefix] == b[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * kScaling * (1.0 - j);
}

std::optional<Measure> parse_measure(std::string_view text) {
  if (text == "jaccard" || text == "jaccard_tokens") return Measure::jaccard_tokens;
  if (text == "jw" || text == "jaro_winkler") return Measure::jaro_winkler;
  return std::nullopt;
}

std::optional<std::size_t> RecordTable::attribute_index(std::string_view name) const {
  auto it = std::find(attributes.begin(), attributes.end(), name);
  if (it == attributes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes.begin());
}

std::optional<std::size_t> RecordTable::record_index(std::string_view id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

const std::string& RecordTable::value(std::size_t record, std::string_view attribute) const {
  const auto k = attribute_index(attribute);
  if (!k) throw ConfigError("unknown attribute '" + std::string(attribute) + "'");
  return values.at(record).at(*k);
}

RecordTable read_records(std::istream& in, const std::string& source_name) {
  const csv::Table t = csv::read(in, source_name);
  if (t.header.empty()) throw ParseError(source_name, 1, "empty header");
  const std::size_t id_col = t.column("id").value_or(0);

  RecordTable table;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != id_col) table.attributes.push_back(t.header[c]);
  }
  std::unordered_set<std::string> seen;
  for (const auto& row : t.rows) {
    if (row.fields.size() != t.header.size()) {
      throw ParseError(source_name, row.line, "expected " + std::to_string(t.header.size()) +
                                                  " fields, got " + std::to_string(row.fields.size()));
    }
    if (!seen.insert(row.fields[id_col]).second) {
      throw ParseError(source_name, row.line, "duplicate record id '" + row.fields[id_col] + "'");
    }
    table.ids.push_back(row.fields[id_col]);
    std::vector<std::string> vals;
    vals.reserve(table.attributes.size());
    for (std::size_t c = 0; c < row.fields.size(); ++c) {
      if (c != id_col) vals.push_back(row.fields[c]);
    }
    table.values.push_back(std::move(vals));
  }
  return table;
}

RecordTable read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_records(in, path);
}

SimilarityConfig SimilarityConfig::normalized() const {
  if (rules.empty()) throw ConfigError("similarity config has no attributes");
  if (!(blocking_threshold >= 0.0 && blocking_threshold <= 1.0)) {
    throw ConfigError("blocking threshold must lie in [0,1]");
  }
  double total = 0.0;
  for (const auto& r : rules) {
    if (!(r.weight >= 0.0)) throw ConfigError("attribute weights must be non-negative");
    total += r.weight;
  }
  if (!(total > 0.0)) throw ConfigError("attribute weights sum to zero");
  SimilarityConfig out = *this;
  for (auto& r : out.rules) r.weight /= total;
  return out;
}

double aggregate_similarity(const RecordTable& table_a, std::size_t record_a,
                            const RecordTable& table_b, std::size_t record_b,
                            const SimilarityConfig& config) {
  const SimilarityConfig cfg = config.normalized();
  double sim = 0.0;
  for (const auto& rule : cfg.rules) {
    const std::string& va = table_a.value(record_a, rule.attribute);
    const std::string& vb = table_b.value(record_b, rule.attribute);
    const double s = rule.measure == Measure::jaccard_tokens ? jaccard_tokens(va, vb)
                                                             : jaro_winkler(va, vb);
    sim += rule.weight * s;
  }
  return std::clamp(sim, 0.0, 1.0);
}

DerivedWeights derive_weights(const RecordTable& table_a, const RecordTable& table_b,
                              const std::vector<std::string>& attributes) {
  if (attributes.empty()) throw ConfigError("no attributes to weigh");
  DerivedWeights out;
  std::vector<double> counts;
  for (const auto& name : attributes) {
    std::unordered_set<std::string> distinct;
    for (const RecordTable* t : {&table_a, &table_b}) {
      const auto k = t->attribute_index(name);
      if (!k) throw ConfigError("unknown attribute '" + name + "'");
      for (const auto& row : t->values) {
        if (!row[*k].empty()) distinct.insert(row[*k]);
      }
    }
    if (distinct.empty()) {
      out.warnings.push_back("attribute '" + name + "' has no values; excluded");
    }
    counts.push_back(static_cast<double>(distinct.size()));
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total == 0.0) throw ConfigError("no attribute has any value");
  for (double c : counts) out.weights.push_back(c / total);
  return out;
}

GoldPairs read_gold(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  if (t.header.size() < 2) throw ParseError(path, 1, "gold mapping needs two columns");
  GoldPairs gold;
  for (const auto& row : t.rows) {
    if (row.fields.size() < 2) throw ParseError(path, row.line, "gold row needs two ids");
    gold.emplace(row.fields[0], row.fields[1]);
  }
  return gold;
}

std::string pair_id(std::string_view id_a, std::string_view id_b) {
  std::string out(id_a);
  out.push_back('|');
  out.append(id_b);
  return out;
}

std::optional<std::pair<std::string, std::string>> split_pair_id(std::string_view id) {
  const auto bar = id.find('|');
  if (bar == std::string_view::npos) return std::nullopt;
  return std::make_pair(std::string(id.substr(0, bar)), std::string(id.substr(bar + 1)));
}

namespace {

// Per-record precomputation for one attribute rule.
struct Column {
  Measure measure;
  double weight;
  std::vector<std::vector<int>> tokens_a, tokens_b;  // sorted token ids
  std::vector<std::string> text_a, text_b;
};

std::vector<std::vector<int>> token_ids(const RecordTable& t, std::size_t k,
                                        std::unordered_map<std::string, int>& dict) {
  std::vector<std::vector<int>> out(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (auto& tok : tokenize(t.values[r][k])) {
      auto [it, fresh] = dict.emplace(std::move(tok), static_cast<int>(dict.size()));
      out[r].push_back(it->second);
    }
    std::sort(out[r].begin(), out[r].end());
  }
  return out;
}

}  // namespace

BlockedWorkload block(const RecordTable& table_a, const RecordTable& table_b,
                      const SimilarityConfig& config, const GoldPairs* gold,
                      std::size_t subset_size) {
  const SimilarityConfig cfg = config.normalized();

  std::vector<Column> columns;
  double jw_weight = 0.0;
  for (const auto& rule : cfg.rules) {
    const auto ka = table_a.attribute_index(rule.attribute);
    const auto kb = table_b.attribute_index(rule.attribute);
    if (!ka || !kb) throw ConfigError("unknown attribute '" + rule.attribute + "'");
    Column col{rule.measure, rule.weight, {}, {}, {}, {}};
    if (rule.measure == Measure::jaccard_tokens) {
      std::unordered_map<std::string, int> dict;
      col.tokens_a = token_ids(table_a, *ka, dict);
      col.tokens_b = token_ids(table_b, *kb, dict);
    } else {
      jw_weight += rule.weight;
      for (const auto& row : table_a.values) col.text_a.push_back(row[*ka]);
      for (const auto& row : table_b.values) col.text_b.push_back(row[*kb]);
    }
    columns.push_back(std::move(col));
  }

  // A pair sharing no token in any Jaccard attribute scores at most jw_weight.
  const bool prefilter = cfg.token_prefilter && cfg.blocking_threshold > jw_weight + 1e-12;
  std::vector<std::vector<std::vector<std::size_t>>> index;  // column -> token -> records of b
  if (prefilter) {
    index.resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].measure != Measure::jaccard_tokens) continue;
      for (std::size_t r = 0; r < table_b.size(); ++r) {
        for (int tok : columns[c].tokens_b[r]) {
          if (index[c].size() <= static_cast<std::size_t>(tok)) index[c].resize(tok + 1);
          index[c][tok].push_back(r);
        }
      }
    }
  }

  auto score = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (const auto& col : columns) {
      const double v = col.measure == Measure::jaccard_tokens
                           ? sorted_jaccard(col.tokens_a[a], col.tokens_b[b])
                           : jaro_winkler(col.text_a[a], col.text_b[b]);
      s += col.weight * v;
    }
    return std::clamp(s, 0.0, 1.0);
  };

  std::vector<InstancePair> pairs;
  std::size_t candidates = 0;
  std::vector<std::size_t> cand;
  std::vector<char> marked(table_b.size(), 0);
  for (std::size_t a = 0; a < table_a.size(); ++a) {
    cand.clear();
    if (prefilter) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].measure != Measure::jaccard_tokens) continue;
        for (int tok : columns[c].tokens_a[a]) {
          if (static_cast<std::size_t>(tok) >= index[c].size()) continue;
          for (std::size_t b : index[c][tok]) {
            if (!marked[b]) {
              marked[b] = 1;
              cand.push_back(b);
            }
          }
        }
      }
      for (std::size_t b : cand) marked[b] = 0;
      std::sort(cand.begin(), cand.end());
    } else {
      cand.resize(table_b.size());
      std::iota(cand.begin(), cand.end(), std::size_t{0});
    }
    for (std::size_t b : cand) {
      ++candidates;
      const double s = score(a, b);
      if (s < cfg.blocking_threshold) continue;
      InstancePair p;
      p.id = pair_id(table_a.ids[a], table_b.ids[b]);
      p.metric = s;
      if (gold) {
        p.truth = gold->count({table_a.ids[a], table_b.ids[b]}) ? Label::match : Label::unmatch;
      }
      pairs.push_back(std::move(p));
    }
  }
  return {Workload(std::move(pairs), subset_size), candidates};
}

}  // namespace erqc
