#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "spl/kvdoc.hpp"
#include "spl/parse.hpp"

namespace spl {

using SymbolId = int;
using RuleId = int;

/// Augmented (transplanted) rules live above this offset so that base rule
/// ids stay stable and traversals remain decodable after pool refreshes.
inline constexpr RuleId kAugmentedIdBase = 1'000'000;

enum class SymbolKind {
    Nonterminal,
    Variable,          // terminal bound to a dataset column
    Literal,           // terminal with a fixed numeric value
    ConstPlaceholder,  // terminal whose value is fitted to data afterwards
};

struct Symbol {
    SymbolKind kind;
    std::string name;
    double literal_value = 0.0;  // Literal only
    int var_index = -1;          // Variable only: dataset row index
};

/// Right-hand side of a production, stored as a small tree whose leaves are
/// grammar symbols. Depth-1 templates cover the ordinary unary/binary rules;
/// deeper templates express grounded composites such as `dw2 * cos(th1 - th2)`
/// or transplanted modules.
struct RuleTemplate {
    struct Node {
        bool is_symbol = false;
        Op op = Op::Leaf;
        SymbolId symbol = -1;
        int child[2] = {-1, -1};
    };
    std::vector<Node> nodes;
    int root = -1;
};

struct ProductionRule {
    RuleId id = -1;
    SymbolId lhs = -1;
    RuleTemplate rhs;
    /// Root operator of the rhs: a concrete op for depth-1 rules, Leaf for a
    /// single-symbol rhs, Composite for grounded multi-op templates.
    Op op = Op::Leaf;
    /// Number of nonterminal leaves in the rhs (0 for grounded rules).
    int arity = 0;
    /// Nonterminal leaves left to right; pushed in reverse so the leftmost
    /// one is expanded next (pre-order derivation).
    std::vector<SymbolId> rhs_nonterminals;
    /// Canonical text, e.g. "A -> A + A"; used for dedup and reports.
    std::string text;

    // Transplanted modules only:
    double recorded_reward = 0.0;
    std::vector<RuleId> source_traversal;  // flattened base-rule derivation
    int flattened_size = 0;                // its length (module size in rules)
};

/// Context-free grammar over expression symbols. Immutable after load except
/// for the augmented-rule pool, which a single coordinator refreshes between
/// search episodes.
class Grammar {
  public:
    SymbolId start() const { return start_; }
    const Symbol& symbol(SymbolId id) const { return symbols_[id]; }
    SymbolId find_symbol(const std::string& name) const;  // -1 when absent
    std::size_t num_symbols() const { return symbols_.size(); }

    /// Dataset column names the grammar's variables bind to, by var_index.
    const std::vector<std::string>& variable_names() const { return variable_names_; }

    const std::vector<ProductionRule>& base_rules() const { return base_rules_; }
    const std::vector<ProductionRule>& augmented_rules() const { return augmented_rules_; }
    std::size_t augmented_cap() const { return augmented_cap_; }

    /// Any rule ever created in this grammar, including evicted augmented
    /// rules (so stored traversals stay decodable within a run).
    const ProductionRule& rule(RuleId id) const;
    bool has_rule(RuleId id) const;

    /// Rules whose lhs is `nt`: base rules in declaration order, then live
    /// augmented rules in creation order.
    const std::vector<RuleId>& rules_for(SymbolId nt) const;

    /// Append a transplanted module rule; returns its id.
    RuleId add_augmented(ProductionRule rule);

    /// Keep the `augmented_cap` highest-reward rules among `keep_ids`
    /// (everything else is evicted from the live pool but stays decodable).
    void set_augmented_pool(std::vector<RuleId> keep_ids);

    friend class GrammarBuilder;

  private:
    void reindex();

    std::vector<Symbol> symbols_;
    std::unordered_map<std::string, SymbolId> symbol_by_name_;
    std::vector<std::string> variable_names_;
    SymbolId start_ = -1;
    std::vector<ProductionRule> base_rules_;
    std::vector<ProductionRule> augmented_rules_;
    std::unordered_map<RuleId, ProductionRule> augmented_archive_;
    std::size_t augmented_cap_ = 5;
    RuleId next_augmented_id_ = kAugmentedIdBase;
    std::vector<std::vector<RuleId>> rules_by_lhs_;
};

/// Programmatic construction (benchmark task definitions use this; config
/// files go through load_grammar).
class GrammarBuilder {
  public:
    GrammarBuilder& nonterminal(const std::string& name);
    GrammarBuilder& variable(const std::string& name);
    GrammarBuilder& literal(const std::string& name);
    GrammarBuilder& constant(const std::string& name);
    GrammarBuilder& start(const std::string& name);
    /// `rhs` is infix over declared symbols, e.g. "A + A" or "dw2 * cos(th1 - th2)".
    GrammarBuilder& rule(const std::string& lhs, const std::string& rhs);
    GrammarBuilder& augmented_cap(std::size_t cap);
    Grammar build();

    /// The equivalent config document (single source of truth for the schema).
    KvDoc to_config() const;

  private:
    struct Decl {
        std::string name;
        SymbolKind kind;
    };
    std::vector<Decl> decls_;
    std::vector<std::pair<std::string, std::string>> rules_;
    std::string start_;
    std::size_t cap_ = 5;
};

/// The MCTS state: ordered prefix of applied rules plus the LIFO stack of
/// nonterminals still awaiting expansion (back() is the top / current node).
struct DerivationState {
    std::vector<RuleId> traversal;
    std::vector<SymbolId> pending;

    bool complete() const { return pending.empty(); }
    int step() const { return static_cast<int>(traversal.size()); }

    static DerivationState fresh(const Grammar& g);
};

/// Rules applicable at the current nonterminal. Throws ContractError on a
/// complete state; never empty for a validated grammar.
const std::vector<RuleId>& valid_actions(const Grammar& g, const DerivationState& s);

/// Apply one production: pop the current nonterminal, push the rhs
/// nonterminals in reverse so derivation stays pre-order, extend traversal.
DerivationState apply_rule(const Grammar& g, const DerivationState& s, RuleId rule_id);
void apply_rule_inplace(const Grammar& g, DerivationState& s, RuleId rule_id);

/// Build a composite production rule (a transplant module) from a complete
/// traversal of base rules. Leading pass-through rules (unary nonterminal
/// rhs, e.g. f -> A) are peeled so the module applies at any site expanding
/// its root nonterminal. The rhs template is fully grounded.
ProductionRule make_module_rule(const Grammar& g, const std::vector<RuleId>& flat_traversal);

/// Load and validate a grammar from a config document. Reports rule index in
/// error messages. Schema (see README):
///   start: A
///   nonterm: A W T
///   var: x y
///   const: C
///   lit: 1 2
///   augmented_cap: 5
///   rule: A -> A + A
Grammar load_grammar(const KvDoc& doc);
Grammar load_grammar_file(const std::string& path);

}  // namespace spl
