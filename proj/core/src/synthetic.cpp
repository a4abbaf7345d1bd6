#include "cqg/synthetic.hpp"

#include <map>
#include <set>

#include "cqg/errors.hpp"
#include "cqg/match.hpp"
#include "cqg/preprocess.hpp"

namespace cqg {

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const char* kPredicateWords[] = {"capital", "export",   "children", "gender",
                                 "award",   "director", "language", "river",
                                 "currency", "leader",  "border",   "founder"};
const char* kEntityWords[] = {"atlantis", "zamunda",    "wakanda", "elbonia",
                              "latveria", "genosha",    "sokovia", "krakoa",
                              "themyscira", "corona"};

struct World {
  std::vector<std::string> predicates;
  std::vector<std::string> entities;

  explicit World(std::size_t n_predicates) {
    for (std::size_t i = 0; i < n_predicates; ++i) {
      const std::size_t base = i % std::size(kPredicateWords);
      std::string name = kPredicateWords[base];
      if (i >= std::size(kPredicateWords)) name += std::to_string(i / std::size(kPredicateWords));
      predicates.push_back(std::move(name));
    }
    for (std::size_t i = 0; i < 2 * std::size(kEntityWords); ++i) {
      const std::size_t base = i % std::size(kEntityWords);
      std::string name = kEntityWords[base];
      if (i >= std::size(kEntityWords)) name += std::to_string(i / std::size(kEntityWords));
      entities.push_back(std::move(name));
    }
  }
};

GraphNode make_node(std::string id, NodeRole role, std::string type) {
  GraphNode n;
  n.id = std::move(id);
  n.role = role;
  n.entity_type = type;
  n.type_name = {std::move(type)};
  return n;
}

Triple make_triple(const QueryGraph& g, std::string s, const std::string& p,
                   std::string o) {
  Triple t;
  t.subject = std::move(s);
  t.predicate = p;
  t.object = std::move(o);
  t.predicate_name = {p};
  t.inverse_predicate_name = {"inverse", p};
  const GraphNode* sn = g.find_node(t.subject);
  const GraphNode* on = g.find_node(t.object);
  const bool st = sn && sn->role == NodeRole::Terminal;
  const bool ot = on && on->role == NodeRole::Terminal;
  if (st != ot) {
    const std::string& id = st ? t.subject : t.object;
    t.grounded = Grounded{id, id};
  }
  return t;
}

// Question text from the encoding tree: "what is the <p> of <...>" with
// grounded entities as placeholders.
TokenSequence phrase(const QueryGraph& g, const EncodingTree& tree, int node) {
  const auto& nd = tree.nodes[node];
  TokenSequence out;
  if (nd.children.empty()) {
    const GraphNode* n = g.find_node(nd.graph_node);
    if (n && n->role == NodeRole::Terminal) {
      out.push_back(Token::make_placeholder(nd.parent_triple));
    } else {
      out.push_back(Token::make_word("something"));
    }
    return out;
  }
  bool first = true;
  for (int c : nd.children) {
    if (!first) out.push_back(Token::make_word("and"));
    first = false;
    out.push_back(Token::make_word("the"));
    for (const std::string& w : g.triples[tree.nodes[c].parent_triple].predicate_name) {
      out.push_back(Token::make_word(w));
    }
    out.push_back(Token::make_word("of"));
    TokenSequence inner = phrase(g, tree, c);
    out.insert(out.end(), inner.begin(), inner.end());
  }
  return out;
}

std::vector<TokenSequence> make_references(const QueryGraph& g, bool two_refs) {
  EncodingTree tree = to_encoding_tree(g);
  TokenSequence body = phrase(g, tree, 0);
  std::vector<TokenSequence> refs;
  auto with_lead = [&](std::initializer_list<const char*> lead) {
    TokenSequence r;
    for (const char* w : lead) r.push_back(Token::make_word(w));
    r.insert(r.end(), body.begin(), body.end());
    r.push_back(Token::make_word("?"));
    return r;
  };
  refs.push_back(with_lead({"what", "is"}));
  if (two_refs) refs.push_back(with_lead({"which", "is"}));
  return refs;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_graphs,
                                          std::size_t predicate_vocab_size) {
  if (n_graphs < 1 || predicate_vocab_size < 1) {
    throw ConfigError("generate_synthetic_corpus: sizes must be >= 1");
  }
  World world(predicate_vocab_size);
  std::uint64_t state = seed;
  SyntheticCorpus out;

  // Simple corpus entries are deduplicated by (direction, predicate, entity).
  std::map<std::string, std::size_t> simple_index;
  auto add_simple = [&](const std::string& pred, const std::string& entity,
                        bool entity_is_subject) -> std::size_t {
    const std::string key =
        (entity_is_subject ? "s" : "o") + std::string("\x01") + pred + "\x01" + entity;
    auto it = simple_index.find(key);
    if (it != simple_index.end()) return it->second;

    Sample s;
    s.graph.nodes.push_back(make_node("q", NodeRole::Question, "thing"));
    s.graph.nodes.push_back(make_node(entity, NodeRole::Terminal, "entity"));
    if (entity_is_subject) {
      s.graph.triples.push_back(make_triple(s.graph, entity, pred, "q"));
    } else {
      s.graph.triples.push_back(make_triple(s.graph, "q", pred, entity));
    }
    canonicalize_graph(s.graph);
    TokenSequence q;
    for (const char* w : {"what", "is", "the"}) q.push_back(Token::make_word(w));
    q.push_back(Token::make_word(pred));
    q.push_back(Token::make_word("of"));
    q.push_back(Token::make_placeholder(0));
    q.push_back(Token::make_word("?"));
    s.references.push_back(std::move(q));
    out.simple_corpus.push_back(std::move(s));
    simple_index.emplace(key, out.simple_corpus.size() - 1);
    return out.simple_corpus.size() - 1;
  };

  for (std::size_t gi = 0; gi < n_graphs; ++gi) {
    // Distinct predicates for this graph.
    std::vector<std::string> preds;
    {
      std::set<std::size_t> chosen;
      while (chosen.size() < 3) chosen.insert(splitmix(state) % world.predicates.size());
      for (std::size_t p : chosen) preds.push_back(world.predicates[p]);
    }
    auto entity = [&]() { return world.entities[splitmix(state) % world.entities.size()]; };

    QueryGraph g;
    g.nodes.push_back(make_node("x", NodeRole::Question, "thing"));
    const std::size_t pattern = splitmix(state) % 4;
    switch (pattern) {
      case 0: {  // chain: x -p0- v, v -p1- E
        g.nodes.push_back(make_node("v", NodeRole::Variable, "thing"));
        const std::string e = entity();
        g.nodes.push_back(make_node(e, NodeRole::Terminal, "entity"));
        g.triples.push_back(make_triple(g, "x", preds[0], "v"));
        g.triples.push_back(make_triple(g, "v", preds[1], e));
        break;
      }
      case 1: {  // star: x -p0- E0, x -p1- E1
        std::string e0 = entity(), e1 = entity();
        while (e1 == e0) e1 = entity();
        g.nodes.push_back(make_node(e0, NodeRole::Terminal, "entity"));
        g.nodes.push_back(make_node(e1, NodeRole::Terminal, "entity"));
        g.triples.push_back(make_triple(g, "x", preds[0], e0));
        g.triples.push_back(make_triple(g, "x", preds[1], e1));
        break;
      }
      case 2: {  // cvt: x -p0- c, c -p1- E0, x -p2- E1
        g.nodes.push_back(make_node("c", NodeRole::Variable, "cvt"));
        std::string e0 = entity(), e1 = entity();
        while (e1 == e0) e1 = entity();
        g.nodes.push_back(make_node(e0, NodeRole::Terminal, "entity"));
        g.nodes.push_back(make_node(e1, NodeRole::Terminal, "entity"));
        g.triples.push_back(make_triple(g, "x", preds[0], "c"));
        g.triples.push_back(make_triple(g, "c", preds[1], e0));
        g.triples.push_back(make_triple(g, "x", preds[2], e1));
        break;
      }
      default: {  // deep chain with a grounded side branch
        g.nodes.push_back(make_node("v", NodeRole::Variable, "thing"));
        g.nodes.push_back(make_node("w", NodeRole::Variable, "thing"));
        std::string e0 = entity(), e1 = entity();
        while (e1 == e0) e1 = entity();
        g.nodes.push_back(make_node(e0, NodeRole::Terminal, "entity"));
        g.nodes.push_back(make_node(e1, NodeRole::Terminal, "entity"));
        g.triples.push_back(make_triple(g, "x", preds[0], "v"));
        g.triples.push_back(make_triple(g, "v", preds[1], "w"));
        g.triples.push_back(make_triple(g, "w", preds[2], e0));
        g.triples.push_back(make_triple(g, "v", preds[0], e1));
        break;
      }
    }
    canonicalize_graph(g);

    Sample sample;
    sample.graph = g;
    sample.references = make_references(g, splitmix(state) % 2 == 0);

    // True sub-question from the first grounded triple.
    const auto grounded = g.grounded_triples();
    const Triple& gt = g.triples[grounded.front()];
    const bool entity_is_subject = g.role(gt.subject) == NodeRole::Terminal;
    const std::string& ge = entity_is_subject ? gt.subject : gt.object;
    const std::size_t sub_id = add_simple(gt.predicate, ge, entity_is_subject);
    sample.subquestion =
        strip_placeholder_indices(out.simple_corpus[sub_id].references.front());

    // Three pseudo variants per grounded predicate: same relation, other
    // entities.
    for (std::size_t ti : grounded) {
      const Triple& t = g.triples[ti];
      const bool subj = g.role(t.subject) == NodeRole::Terminal;
      const std::string& used = subj ? t.subject : t.object;
      std::size_t added = 0;
      for (std::size_t k = 0; added < 3 && k < world.entities.size(); ++k) {
        const std::string& cand = world.entities[(splitmix(state) + k) % world.entities.size()];
        if (cand == used) continue;
        add_simple(t.predicate, cand, subj);
        ++added;
      }
    }
    out.samples.push_back(std::move(sample));
  }

  std::vector<QueryGraph> simple_graphs;
  for (const Sample& s : out.simple_corpus) simple_graphs.push_back(s.graph);
  for (Sample& s : out.samples) {
    s.pseudo_pool_ids = find_pseudo_pool_ids(s.graph, simple_graphs);
  }
  return out;
}

}  // namespace cqg
