#pragma once

#include <string>
#include <vector>

namespace spl {

enum class Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Cosh,
    Sign,
    Leaf,
    Composite,
};

bool op_is_binary(Op op);
bool op_is_unary(Op op);
const char* op_name(Op op);

/// Syntax tree of an infix expression over named leaves. Leaves are plain
/// identifiers or numerals; resolution against a grammar/variable table is
/// the caller's job.
struct ParsedExpr {
    struct Node {
        bool is_leaf = false;
        Op op = Op::Leaf;
        std::string leaf;  // identifier or numeral text
        int child[2] = {-1, -1};
    };
    std::vector<Node> nodes;
    int root = -1;
};

/// Parse infix with precedence: ^ > unary minus > * / > + -, functions
/// sin cos exp log sqrt cosh sign, parentheses. Unary minus is expanded to
/// (0 - x). Throws ConfigError on malformed input.
ParsedExpr parse_infix(const std::string& text);

bool is_numeral(const std::string& tok);

}  // namespace spl
