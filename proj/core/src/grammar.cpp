#include "spl/grammar.hpp"

#include <algorithm>
#include <cstdlib>

#include "spl/errors.hpp"

namespace spl {

SymbolId Grammar::find_symbol(const std::string& name) const {
    auto it = symbol_by_name_.find(name);
    return it == symbol_by_name_.end() ? -1 : it->second;
}

const ProductionRule& Grammar::rule(RuleId id) const {
    if (id >= 0 && id < static_cast<RuleId>(base_rules_.size())) return base_rules_[id];
    auto it = augmented_archive_.find(id);
    if (it == augmented_archive_.end())
        throw ContractError("unknown rule id " + std::to_string(id));
    return it->second;
}

bool Grammar::has_rule(RuleId id) const {
    if (id >= 0 && id < static_cast<RuleId>(base_rules_.size())) return true;
    return augmented_archive_.count(id) > 0;
}

const std::vector<RuleId>& Grammar::rules_for(SymbolId nt) const {
    return rules_by_lhs_.at(static_cast<std::size_t>(nt));
}

RuleId Grammar::add_augmented(ProductionRule rule) {
    rule.id = next_augmented_id_++;
    augmented_archive_.emplace(rule.id, rule);
    augmented_rules_.push_back(std::move(rule));
    reindex();
    return augmented_rules_.back().id;
}

void Grammar::set_augmented_pool(std::vector<RuleId> keep_ids) {
    std::vector<ProductionRule> pool;
    pool.reserve(keep_ids.size());
    for (RuleId id : keep_ids) pool.push_back(rule(id));
    // creation order keeps rules_for deterministic
    std::sort(pool.begin(), pool.end(),
              [](const ProductionRule& a, const ProductionRule& b) { return a.id < b.id; });
    augmented_rules_ = std::move(pool);
    reindex();
}

void Grammar::reindex() {
    rules_by_lhs_.assign(symbols_.size(), {});
    for (const auto& r : base_rules_) rules_by_lhs_[r.lhs].push_back(r.id);
    for (const auto& r : augmented_rules_) rules_by_lhs_[r.lhs].push_back(r.id);
}

DerivationState DerivationState::fresh(const Grammar& g) {
    DerivationState s;
    s.pending.push_back(g.start());
    return s;
}

const std::vector<RuleId>& valid_actions(const Grammar& g, const DerivationState& s) {
    if (s.complete()) throw ContractError("valid_actions on a complete derivation");
    return g.rules_for(s.pending.back());
}

void apply_rule_inplace(const Grammar& g, DerivationState& s, RuleId rule_id) {
    if (s.complete()) throw ContractError("apply_rule on a complete derivation");
    const ProductionRule& r = g.rule(rule_id);
    if (r.lhs != s.pending.back())
        throw ContractError("rule " + std::to_string(rule_id) + " does not expand symbol '" +
                            g.symbol(s.pending.back()).name + "'");
    s.pending.pop_back();
    for (auto it = r.rhs_nonterminals.rbegin(); it != r.rhs_nonterminals.rend(); ++it)
        s.pending.push_back(*it);
    s.traversal.push_back(rule_id);
}

DerivationState apply_rule(const Grammar& g, const DerivationState& s, RuleId rule_id) {
    DerivationState out = s;
    apply_rule_inplace(g, out, rule_id);
    return out;
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

namespace {

struct SymbolTable {
    std::vector<Symbol> symbols;
    std::unordered_map<std::string, SymbolId> by_name;

    SymbolId add(const std::string& name, SymbolKind kind) {
        if (by_name.count(name))
            throw ConfigError("duplicate symbol declaration: " + name);
        Symbol sym;
        sym.kind = kind;
        sym.name = name;
        if (kind == SymbolKind::Literal) {
            char* end = nullptr;
            sym.literal_value = std::strtod(name.c_str(), &end);
            if (end != name.c_str() + name.size())
                throw ConfigError("literal symbol is not numeric: " + name);
        }
        symbols.push_back(std::move(sym));
        SymbolId id = static_cast<SymbolId>(symbols.size()) - 1;
        by_name.emplace(name, id);
        return id;
    }
};

/// Convert a ParsedExpr into a RuleTemplate, resolving leaf names.
RuleTemplate make_template(const ParsedExpr& pe, const SymbolTable& table, int rule_index) {
    RuleTemplate t;
    t.nodes.reserve(pe.nodes.size());
    std::vector<int> remap(pe.nodes.size(), -1);

    // ParsedExpr nodes are in child-before-parent order already
    for (std::size_t i = 0; i < pe.nodes.size(); ++i) {
        const auto& pn = pe.nodes[i];
        RuleTemplate::Node n;
        if (pn.is_leaf) {
            auto it = table.by_name.find(pn.leaf);
            if (it == table.by_name.end())
                throw ConfigError("rule " + std::to_string(rule_index) +
                                  ": unknown symbol in rhs: " + pn.leaf);
            n.is_symbol = true;
            n.symbol = it->second;
        } else {
            n.op = pn.op;
            n.child[0] = remap[pn.child[0]];
            if (pn.child[1] >= 0) n.child[1] = remap[pn.child[1]];
        }
        t.nodes.push_back(n);
        remap[i] = static_cast<int>(t.nodes.size()) - 1;
    }
    t.root = remap[pe.root];
    return t;
}

void collect_nonterminals(const RuleTemplate& t, int node, const std::vector<Symbol>& symbols,
                          std::vector<SymbolId>& out) {
    const auto& n = t.nodes[node];
    if (n.is_symbol) {
        if (symbols[n.symbol].kind == SymbolKind::Nonterminal) out.push_back(n.symbol);
        return;
    }
    collect_nonterminals(t, n.child[0], symbols, out);
    if (n.child[1] >= 0) collect_nonterminals(t, n.child[1], symbols, out);
}

Op classify_rule(const RuleTemplate& t) {
    const auto& root = t.nodes[t.root];
    if (root.is_symbol) return Op::Leaf;
    bool depth_one = true;
    for (int c : root.child) {
        if (c >= 0 && !t.nodes[c].is_symbol) depth_one = false;
    }
    return depth_one ? root.op : Op::Composite;
}

std::string canonical_rule_text(const std::string& lhs, const std::string& rhs) {
    return lhs + " -> " + rhs;
}

}  // namespace

Grammar GrammarBuilder::build() {
    std::vector<std::pair<std::string, SymbolKind>> decls;
    decls.reserve(decls_.size());
    for (const auto& d : decls_) decls.emplace_back(d.name, d.kind);
    const auto& rule_texts = rules_;
    const std::string& start = start_;
    const std::size_t cap = cap_;

    Grammar g;
    SymbolTable table;
    int var_index = 0;
    for (const auto& [name, kind] : decls) {
        SymbolId id = table.add(name, kind);
        if (kind == SymbolKind::Variable) {
            table.symbols[id].var_index = var_index++;
            g.variable_names_.push_back(name);
        }
    }

    if (start.empty()) throw ConfigError("grammar: missing start symbol");
    auto sit = table.by_name.find(start);
    if (sit == table.by_name.end()) throw ConfigError("grammar: undeclared start symbol: " + start);
    if (table.symbols[sit->second].kind != SymbolKind::Nonterminal)
        throw ConfigError("grammar: start symbol must be a nonterminal: " + start);
    g.start_ = sit->second;

    if (rule_texts.empty()) throw ConfigError("grammar: empty rule list");

    std::vector<std::string> seen_texts;
    int index = 0;
    for (const auto& [lhs_name, rhs_text] : rule_texts) {
        ProductionRule r;
        auto lit = table.by_name.find(lhs_name);
        if (lit == table.by_name.end())
            throw ConfigError("rule " + std::to_string(index) + ": undeclared lhs: " + lhs_name);
        r.lhs = lit->second;
        if (table.symbols[r.lhs].kind != SymbolKind::Nonterminal)
            throw ConfigError("rule " + std::to_string(index) + ": lhs is not a nonterminal: " +
                              lhs_name);
        r.rhs = make_template(parse_infix(rhs_text), table, index);
        r.op = classify_rule(r.rhs);
        collect_nonterminals(r.rhs, r.rhs.root, table.symbols, r.rhs_nonterminals);
        r.arity = static_cast<int>(r.rhs_nonterminals.size());
        r.text = canonical_rule_text(lhs_name, rhs_text);
        std::string key = lhs_name + "->" + rhs_text;
        key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
        if (std::find(seen_texts.begin(), seen_texts.end(), key) != seen_texts.end())
            throw ConfigError("rule " + std::to_string(index) + ": duplicate rule: " + r.text);
        seen_texts.push_back(key);
        r.id = index++;
        g.base_rules_.push_back(std::move(r));
    }

    g.symbols_ = std::move(table.symbols);
    g.symbol_by_name_ = std::move(table.by_name);
    g.augmented_cap_ = cap;
    g.reindex();

    // no dead ends: every nonterminal needs at least one rule
    for (std::size_t sid = 0; sid < g.symbols_.size(); ++sid) {
        if (g.symbols_[sid].kind == SymbolKind::Nonterminal && g.rules_by_lhs_[sid].empty())
            throw ConfigError("grammar: nonterminal '" + g.symbols_[sid].name + "' has no rule");
    }
    return g;
}

GrammarBuilder& GrammarBuilder::nonterminal(const std::string& name) {
    for (const auto& n : split_ws(name)) decls_.push_back({n, SymbolKind::Nonterminal});
    return *this;
}

GrammarBuilder& GrammarBuilder::variable(const std::string& name) {
    for (const auto& n : split_ws(name)) decls_.push_back({n, SymbolKind::Variable});
    return *this;
}

GrammarBuilder& GrammarBuilder::literal(const std::string& name) {
    for (const auto& n : split_ws(name)) decls_.push_back({n, SymbolKind::Literal});
    return *this;
}

GrammarBuilder& GrammarBuilder::constant(const std::string& name) {
    for (const auto& n : split_ws(name)) decls_.push_back({n, SymbolKind::ConstPlaceholder});
    return *this;
}

GrammarBuilder& GrammarBuilder::start(const std::string& name) {
    start_ = name;
    return *this;
}

GrammarBuilder& GrammarBuilder::rule(const std::string& lhs, const std::string& rhs) {
    rules_.emplace_back(lhs, rhs);
    return *this;
}

GrammarBuilder& GrammarBuilder::augmented_cap(std::size_t cap) {
    cap_ = cap;
    return *this;
}

KvDoc GrammarBuilder::to_config() const {
    KvDoc doc;
    doc.add("start", start_);
    std::string nts, vars, lits, consts;
    for (const auto& d : decls_) {
        std::string* dst = nullptr;
        switch (d.kind) {
            case SymbolKind::Nonterminal: dst = &nts; break;
            case SymbolKind::Variable: dst = &vars; break;
            case SymbolKind::Literal: dst = &lits; break;
            case SymbolKind::ConstPlaceholder: dst = &consts; break;
        }
        if (!dst->empty()) *dst += ' ';
        *dst += d.name;
    }
    if (!nts.empty()) doc.add("nonterm", nts);
    if (!vars.empty()) doc.add("var", vars);
    if (!consts.empty()) doc.add("const", consts);
    if (!lits.empty()) doc.add("lit", lits);
    doc.add_int("augmented_cap", static_cast<std::int64_t>(cap_));
    for (const auto& [lhs, rhs] : rules_) doc.add("rule", lhs + " -> " + rhs);
    return doc;
}

namespace {

bool is_pass_through(const ProductionRule& r, const Grammar& g) {
    if (r.rhs.nodes.size() != 1) return false;
    const auto& n = r.rhs.nodes[r.rhs.root];
    return n.is_symbol && g.symbol(n.symbol).kind == SymbolKind::Nonterminal;
}

struct ModuleTemplate {
    const Grammar& g;
    const std::vector<RuleId>& traversal;
    std::size_t cursor = 0;
    RuleTemplate out;

    int instantiate(const RuleTemplate& t, int tnode) {
        const auto& tn = t.nodes[tnode];
        if (tn.is_symbol) {
            if (g.symbol(tn.symbol).kind == SymbolKind::Nonterminal) return expand();
            RuleTemplate::Node n;
            n.is_symbol = true;
            n.symbol = tn.symbol;
            out.nodes.push_back(n);
            return static_cast<int>(out.nodes.size()) - 1;
        }
        int left = instantiate(t, tn.child[0]);
        int right = tn.child[1] >= 0 ? instantiate(t, tn.child[1]) : -1;
        RuleTemplate::Node n;
        n.op = tn.op;
        n.child[0] = left;
        n.child[1] = right;
        out.nodes.push_back(n);
        return static_cast<int>(out.nodes.size()) - 1;
    }

    int expand() {
        if (cursor >= traversal.size())
            throw ContractError("make_module_rule: traversal is incomplete");
        const ProductionRule& r = g.rule(traversal[cursor++]);
        if (!r.source_traversal.empty())
            throw ContractError("make_module_rule: traversal must contain base rules only");
        return instantiate(r.rhs, r.rhs.root);
    }
};

std::string template_text(const Grammar& g, const RuleTemplate& t, int i, bool root) {
    const auto& n = t.nodes[i];
    if (n.is_symbol) return g.symbol(n.symbol).name;
    if (n.child[1] < 0) {
        const char* fn = op_name(n.op);
        return std::string(fn) + "(" + template_text(g, t, n.child[0], true) + ")";
    }
    const char* sym = "?";
    switch (n.op) {
        case Op::Add: sym = " + "; break;
        case Op::Sub: sym = " - "; break;
        case Op::Mul: sym = " * "; break;
        case Op::Div: sym = " / "; break;
        case Op::Pow: sym = " ^ "; break;
        default: break;
    }
    std::string s = template_text(g, t, n.child[0], false) + sym +
                    template_text(g, t, n.child[1], false);
    return root ? s : "( " + s + " )";
}

}  // namespace

ProductionRule make_module_rule(const Grammar& g, const std::vector<RuleId>& flat_traversal) {
    std::size_t begin = 0;
    while (begin + 1 < flat_traversal.size() &&
           is_pass_through(g.rule(flat_traversal[begin]), g))
        ++begin;
    std::vector<RuleId> body(flat_traversal.begin() + static_cast<std::ptrdiff_t>(begin),
                             flat_traversal.end());
    if (body.empty()) throw ContractError("make_module_rule: empty traversal");

    ModuleTemplate mt{g, body};
    mt.out.root = mt.expand();
    if (mt.cursor != body.size())
        throw ContractError("make_module_rule: traversal has trailing rules");

    ProductionRule rule;
    rule.lhs = g.rule(body.front()).lhs;
    rule.rhs = std::move(mt.out);
    rule.op = rule.rhs.nodes[rule.rhs.root].is_symbol ? Op::Leaf : Op::Composite;
    rule.arity = 0;
    rule.source_traversal = std::move(body);
    rule.flattened_size = static_cast<int>(rule.source_traversal.size());
    rule.text = g.symbol(rule.lhs).name + " -> " +
                template_text(g, rule.rhs, rule.rhs.root, true);
    return rule;
}

Grammar load_grammar(const KvDoc& doc) {
    GrammarBuilder b;
    for (const auto& v : doc.all("nonterm")) b.nonterminal(v);
    for (const auto& v : doc.all("var")) b.variable(v);
    for (const auto& v : doc.all("const")) b.constant(v);
    for (const auto& v : doc.all("lit")) b.literal(v);
    b.start(doc.get_or("start", ""));
    b.augmented_cap(static_cast<std::size_t>(doc.get_int_or("augmented_cap", 5)));
    int index = 0;
    for (const auto& v : doc.all("rule")) {
        std::size_t arrow = v.find("->");
        if (arrow == std::string::npos)
            throw ConfigError("rule " + std::to_string(index) + ": expected 'LHS -> RHS': " + v);
        std::string lhs = v.substr(0, arrow);
        std::string rhs = v.substr(arrow + 2);
        auto lhs_toks = split_ws(lhs);
        if (lhs_toks.size() != 1)
            throw ConfigError("rule " + std::to_string(index) + ": malformed lhs: " + v);
        const std::size_t a = rhs.find_first_not_of(" \t");
        const std::size_t z = rhs.find_last_not_of(" \t");
        if (a == std::string::npos)
            throw ConfigError("rule " + std::to_string(index) + ": empty rhs: " + v);
        b.rule(lhs_toks[0], rhs.substr(a, z - a + 1));
        ++index;
    }
    return b.build();
}

Grammar load_grammar_file(const std::string& path) { return load_grammar(KvDoc::load(path)); }

}  // namespace spl
