#include "cqg/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "cqg/errors.hpp"
#include "cqg/match.hpp"
#include "json.hpp"

namespace cqg {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool is_punct(char c) {
  switch (c) {
    case '?': case '!': case '.': case ',': case ';': case ':':
    case '"': case '(': case ')':
      return true;
    default:
      return false;
  }
}

std::uint64_t splitmix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::string lower;
  lower.reserve(text.size());
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  std::vector<std::string> out;
  std::istringstream in(lower);
  std::string piece;
  while (in >> piece) {
    std::vector<std::string> lead, trail;
    while (!piece.empty() && is_punct(piece.front())) {
      lead.push_back(std::string(1, piece.front()));
      piece.erase(piece.begin());
    }
    while (!piece.empty() && is_punct(piece.back())) {
      trail.push_back(std::string(1, piece.back()));
      piece.pop_back();
    }
    for (auto& t : lead) out.push_back(std::move(t));
    if (piece.size() > 2 && piece.ends_with("'s")) {
      out.push_back(piece.substr(0, piece.size() - 2));
      out.push_back("'s");
    } else if (!piece.empty()) {
      out.push_back(piece);
    }
    for (auto it = trail.rbegin(); it != trail.rend(); ++it) out.push_back(std::move(*it));
  }
  return out;
}

namespace {

// Longest common contiguous token span; on ties the earliest question
// position wins. Only word tokens participate.
struct Span {
  std::size_t q_begin = 0, len = 0;
};

Span longest_common_span(const TokenSequence& question,
                         const std::vector<std::string>& entity) {
  Span best;
  const std::size_t n = question.size(), m = entity.size();
  // dp[j]: length of common suffix ending at question i, entity j
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const Token& qt = question[i - 1];
      if (!qt.is_placeholder() && qt.word == entity[j - 1]) {
        cur[j] = prev[j - 1] + 1;
        if (cur[j] > best.len) {
          best.len = cur[j];
          best.q_begin = i - cur[j];
        }
      } else {
        cur[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

TokenSequence replace_entities(const std::string& question,
                               const std::vector<std::pair<int, std::string>>& entities,
                               std::vector<std::string>* warnings) {
  TokenSequence tokens;
  for (const std::string& w : tokenize(question)) tokens.push_back(Token::make_word(w));

  // Longest surface name first; stable on ties.
  std::vector<std::size_t> order(entities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::vector<std::string>> names(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) names[i] = tokenize(entities[i].second);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return names[a].size() > names[b].size();
  });

  for (std::size_t oi : order) {
    if (names[oi].empty()) {
      if (warnings) warnings->push_back("entity with empty name (index " +
                                        std::to_string(entities[oi].first) + ")");
      continue;
    }
    Span span = longest_common_span(tokens, names[oi]);
    if (span.len == 0) {
      if (warnings) warnings->push_back("entity '" + entities[oi].second +
                                        "' not found in question");
      continue;
    }
    TokenSequence next(tokens.begin(), tokens.begin() + span.q_begin);
    next.push_back(Token::make_placeholder(entities[oi].first));
    next.insert(next.end(), tokens.begin() + span.q_begin + span.len, tokens.end());
    tokens = std::move(next);
  }
  return tokens;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    out += p;
    out += '\x02';
  }
  return out;
}

std::string triple_signature(const QueryGraph& g, const Triple& t) {
  const GraphNode* s = g.find_node(t.subject);
  const GraphNode* o = g.find_node(t.object);
  std::string sig = t.predicate + '\x01' + join(t.predicate_name) + '\x01' +
                    join(t.inverse_predicate_name) + '\x01';
  for (const GraphNode* n : {s, o}) {
    if (n) {
      sig += role_name(n->role) + '\x01' + n->entity_type + '\x01' + join(n->type_name);
    }
    sig += '\x01';
  }
  sig += t.grounded ? 'G' : '-';
  return sig;
}

}  // namespace

void canonicalize_graph(QueryGraph& g) {
  std::vector<std::size_t> order(g.triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> sigs(g.triples.size());
  for (std::size_t i = 0; i < g.triples.size(); ++i) sigs[i] = triple_signature(g, g.triples[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigs[a] < sigs[b]; });
  std::vector<Triple> sorted;
  sorted.reserve(order.size());
  for (std::size_t i : order) sorted.push_back(g.triples[i]);
  g.triples = std::move(sorted);
}

std::string graph_signature(const QueryGraph& g) {
  std::vector<std::string> sigs;
  for (const Triple& t : g.triples) sigs.push_back(triple_signature(g, t));
  std::sort(sigs.begin(), sigs.end());
  std::string out;
  for (const auto& s : sigs) {
    out += s;
    out += '\x03';
  }
  return out;
}

std::vector<Sample> group_samples(const std::vector<GroupItem>& items) {
  std::vector<Sample> samples;
  std::map<std::string, std::vector<std::size_t>> buckets;  // signature -> sample idx

  for (const GroupItem& item : items) {
    const std::string key = graph_signature(item.graph);
    std::optional<std::size_t> target;
    std::vector<std::size_t> triple_map;
    for (std::size_t si : buckets[key]) {
      auto mapping = find_equivalence(item.graph, samples[si].graph);
      if (mapping) {
        target = si;
        triple_map = *mapping;
        break;
      }
    }
    if (!target) {
      Sample s;
      s.graph = item.graph;
      s.references.push_back(item.question);
      s.subquestion = item.subquestion;
      samples.push_back(std::move(s));
      buckets[key].push_back(samples.size() - 1);
      continue;
    }
    Sample& s = samples[*target];
    TokenSequence remapped = item.question;
    for (Token& t : remapped) {
      if (t.is_placeholder() && t.ph_index >= 0) {
        if (static_cast<std::size_t>(t.ph_index) >= triple_map.size()) {
          throw DataError("placeholder index out of range while grouping");
        }
        t.ph_index = static_cast<int>(triple_map[t.ph_index]);
      }
    }
    s.references.push_back(std::move(remapped));
    if (!s.subquestion && item.subquestion) s.subquestion = item.subquestion;
  }
  return samples;
}

SplitResult split_dataset(const std::vector<Sample>& samples, const SplitSpec& spec) {
  if (spec.train <= 0 || spec.dev <= 0 || spec.test <= 0) {
    throw SplitError("split ratios must be positive");
  }
  if (std::abs(spec.train + spec.dev + spec.test - 1.0) > 1e-9) {
    throw SplitError("split ratios must sum to 1");
  }
  if (samples.size() < 3) throw SplitError("need at least 3 samples to split");

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t state = spec.seed;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[splitmix(state) % i]);
  }

  const std::size_t n = samples.size();
  const std::size_t n_train = static_cast<std::size_t>(n * spec.train);
  const std::size_t n_dev = static_cast<std::size_t>(n * spec.dev);

  SplitResult out;
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = samples[order[i]];
    if (i < n_train) out.train.push_back(s);
    else if (i < n_train + n_dev) out.dev.push_back(s);
    else out.test.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL serialization

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    long line) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError("unknown field '" + key + "'", line);
  }
}

QueryGraph graph_from_json(const json& j, long line) {
  if (!j.is_object()) throw ParseError("graph must be an object", line);
  reject_unknown(j, {"nodes", "triples"}, line);
  QueryGraph g;
  for (const json& nj : j.at("nodes")) {
    reject_unknown(nj, {"id", "role", "entity_type", "type_name"}, line);
    GraphNode n;
    n.id = nj.at("id").get<std::string>();
    n.role = role_from_name(nj.at("role").get<std::string>());
    n.entity_type = nj.at("entity_type").get<std::string>();
    n.type_name = nj.at("type_name").get<std::vector<std::string>>();
    g.nodes.push_back(std::move(n));
  }
  for (const json& tj : j.at("triples")) {
    reject_unknown(tj, {"s", "p", "p_name", "p_inv_name", "o", "grounded"}, line);
    Triple t;
    t.subject = tj.at("s").get<std::string>();
    t.predicate = tj.at("p").get<std::string>();
    t.object = tj.at("o").get<std::string>();
    t.predicate_name = tj.at("p_name").get<std::vector<std::string>>();
    t.inverse_predicate_name = tj.at("p_inv_name").get<std::vector<std::string>>();
    if (!tj.at("grounded").is_null()) {
      reject_unknown(tj.at("grounded"), {"node", "name"}, line);
      t.grounded = Grounded{tj.at("grounded").at("node").get<std::string>(),
                            tj.at("grounded").at("name").get<std::string>()};
    }
    g.triples.push_back(std::move(t));
  }
  return g;
}

ordered_json graph_to_json(const QueryGraph& g) {
  ordered_json nodes = ordered_json::array();
  for (const GraphNode& n : g.nodes) {
    nodes.push_back({{"id", n.id},
                     {"role", role_name(n.role)},
                     {"entity_type", n.entity_type},
                     {"type_name", n.type_name}});
  }
  ordered_json triples = ordered_json::array();
  for (const Triple& t : g.triples) {
    ordered_json tj{{"s", t.subject},
                    {"p", t.predicate},
                    {"p_name", t.predicate_name},
                    {"p_inv_name", t.inverse_predicate_name},
                    {"o", t.object}};
    tj["grounded"] = t.grounded
                         ? ordered_json{{"node", t.grounded->node}, {"name", t.grounded->name}}
                         : ordered_json(nullptr);
    triples.push_back(std::move(tj));
  }
  return ordered_json{{"nodes", std::move(nodes)}, {"triples", std::move(triples)}};
}

TokenSequence tokens_from_json(const json& arr, long line) {
  if (!arr.is_array()) throw ParseError("token sequence must be an array", line);
  TokenSequence out;
  for (const json& t : arr) out.push_back(token_from_text(t.get<std::string>()));
  return out;
}

json tokens_to_json(const TokenSequence& seq) {
  json arr = json::array();
  for (const Token& t : seq) arr.push_back(t.text());
  return arr;
}

void validate_sample(const Sample& s, long line) {
  auto issues = validate_graph(s.graph);
  if (!issues.empty()) throw ParseError("invalid graph: " + issues.front(), line);
  if (s.references.empty()) throw ParseError("sample without references", line);
  for (const TokenSequence& ref : s.references) {
    for (const Token& t : ref) {
      if (t.is_placeholder()) {
        if (t.ph_index < 0 ||
            static_cast<std::size_t>(t.ph_index) >= s.graph.triples.size() ||
            !s.graph.triples[t.ph_index].grounded) {
          throw ParseError("reference placeholder does not name a grounded triple",
                           line);
        }
      }
    }
  }
}

}  // namespace

std::vector<Sample> load_samples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<Sample> out;
  std::string text;
  long line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    reject_unknown(j, {"graph", "references", "subquestion", "pseudo_pool_ids"}, line);
    Sample s;
    try {
      s.graph = graph_from_json(j.at("graph"), line);
      for (const json& r : j.at("references")) s.references.push_back(tokens_from_json(r, line));
      if (!j.at("subquestion").is_null()) {
        s.subquestion = tokens_from_json(j.at("subquestion"), line);
      }
      s.pseudo_pool_ids = j.at("pseudo_pool_ids").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad sample: ") + e.what(), line);
    }
    validate_sample(s, line);
    out.push_back(std::move(s));
  }
  return out;
}

void save_samples_jsonl(const std::string& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  for (const Sample& s : samples) {
    ordered_json j;
    j["graph"] = graph_to_json(s.graph);
    ordered_json refs = ordered_json::array();
    for (const TokenSequence& r : s.references) refs.push_back(tokens_to_json(r));
    j["references"] = std::move(refs);
    j["subquestion"] = s.subquestion ? ordered_json(tokens_to_json(*s.subquestion))
                                     : ordered_json(nullptr);
    j["pseudo_pool_ids"] = s.pseudo_pool_ids;
    out << j.dump() << '\n';
  }
}

std::vector<RawItem> load_raw_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<RawItem> out;
  std::string text;
  long line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    reject_unknown(j, {"graph", "question", "subquestion"}, line);
    RawItem item;
    try {
      item.graph = graph_from_json(j.at("graph"), line);
      item.question = j.at("question").get<std::string>();
      if (j.contains("subquestion") && !j.at("subquestion").is_null()) {
        reject_unknown(j.at("subquestion"), {"graph", "question"}, line);
        item.sub_graph = graph_from_json(j.at("subquestion").at("graph"), line);
        item.sub_question = j.at("subquestion").at("question").get<std::string>();
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad raw item: ") + e.what(), line);
    }
    auto issues = validate_graph(item.graph);
    if (!issues.empty()) throw ParseError("invalid graph: " + issues.front(), line);
    out.push_back(std::move(item));
  }
  return out;
}

namespace {

std::vector<std::pair<int, std::string>> indexed_entities(const QueryGraph& g,
                                                          bool indexed) {
  std::vector<std::pair<int, std::string>> out;
  for (std::size_t i = 0; i < g.triples.size(); ++i) {
    if (g.triples[i].grounded) {
      out.emplace_back(indexed ? static_cast<int>(i) : -1, g.triples[i].grounded->name);
    }
  }
  return out;
}

}  // namespace

PreprocessResult preprocess_corpus(const std::vector<RawItem>& complex_items,
                                   const std::vector<RawItem>& simple_items) {
  PreprocessResult result;

  for (const RawItem& raw : simple_items) {
    Sample s;
    s.graph = raw.graph;
    canonicalize_graph(s.graph);
    s.references.push_back(
        replace_entities(raw.question, indexed_entities(s.graph, true), &result.warnings));
    result.simple_corpus.push_back(std::move(s));
  }

  std::vector<GroupItem> items;
  for (const RawItem& raw : complex_items) {
    GroupItem item;
    item.graph = raw.graph;
    canonicalize_graph(item.graph);
    item.question = replace_entities(raw.question, indexed_entities(item.graph, true),
                                     &result.warnings);
    if (raw.sub_graph && raw.sub_question) {
      QueryGraph sg = *raw.sub_graph;
      canonicalize_graph(sg);
      if (!is_subquestion(sg, item.graph)) {
        result.warnings.push_back("declared sub-question is not a sub-question");
      }
      item.subquestion = replace_entities(*raw.sub_question,
                                          indexed_entities(sg, false), &result.warnings);
    }
    items.push_back(std::move(item));
  }
  result.samples = group_samples(items);

  std::vector<QueryGraph> simple_graphs;
  for (const Sample& s : result.simple_corpus) simple_graphs.push_back(s.graph);
  for (Sample& s : result.samples) {
    s.pseudo_pool_ids = find_pseudo_pool_ids(s.graph, simple_graphs);
  }
  return result;
}

}  // namespace cqg
