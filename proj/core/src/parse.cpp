#include "spl/parse.hpp"

#include <cctype>
#include <cstdlib>
#include <map>

#include "spl/errors.hpp"

namespace spl {

bool op_is_binary(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
        case Op::Pow:
            return true;
        default:
            return false;
    }
}

bool op_is_unary(Op op) {
    switch (op) {
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
        case Op::Log:
        case Op::Sqrt:
        case Op::Cosh:
        case Op::Sign:
            return true;
        default:
            return false;
    }
}

const char* op_name(Op op) {
    switch (op) {
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Pow: return "pow";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sqrt: return "sqrt";
        case Op::Cosh: return "cosh";
        case Op::Sign: return "sign";
        case Op::Leaf: return "leaf";
        case Op::Composite: return "composite";
    }
    return "?";
}

bool is_numeral(const std::string& tok) {
    if (tok.empty()) return false;
    char* end = nullptr;
    std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size();
}

namespace {

struct Token {
    enum class Kind { Ident, Number, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Kind kind;
    std::string text;
};

class Lexer {
  public:
    explicit Lexer(const std::string& s) : s_(s) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (i_ >= s_.size()) {
            tok_ = {Token::Kind::End, ""};
            return;
        }
        char c = s_[i_];
        switch (c) {
            case '+': tok_ = {Token::Kind::Plus, "+"}; ++i_; return;
            case '-': tok_ = {Token::Kind::Minus, "-"}; ++i_; return;
            case '*': tok_ = {Token::Kind::Star, "*"}; ++i_; return;
            case '/': tok_ = {Token::Kind::Slash, "/"}; ++i_; return;
            case '^': tok_ = {Token::Kind::Caret, "^"}; ++i_; return;
            case '(': tok_ = {Token::Kind::LParen, "("}; ++i_; return;
            case ')': tok_ = {Token::Kind::RParen, ")"}; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i_;
            while (j < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '.' ||
                    s_[j] == 'e' || s_[j] == 'E' ||
                    ((s_[j] == '+' || s_[j] == '-') && j > i_ &&
                     (s_[j - 1] == 'e' || s_[j - 1] == 'E'))))
                ++j;
            tok_ = {Token::Kind::Number, s_.substr(i_, j - i_)};
            i_ = j;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) ||
                                     s_[j] == '_' || s_[j] == '\''))
                ++j;
            tok_ = {Token::Kind::Ident, s_.substr(i_, j - i_)};
            i_ = j;
            return;
        }
        throw ConfigError(std::string("unexpected character '") + c + "' in expression: " + s_);
    }

    const std::string& s_;
    std::size_t i_ = 0;
    Token tok_;
};

const std::map<std::string, Op>& function_table() {
    static const std::map<std::string, Op> table = {
        {"sin", Op::Sin},   {"cos", Op::Cos},   {"exp", Op::Exp},  {"log", Op::Log},
        {"sqrt", Op::Sqrt}, {"cosh", Op::Cosh}, {"sign", Op::Sign}};
    return table;
}

class Parser {
  public:
    Parser(const std::string& text, ParsedExpr& out) : lex_(text), out_(out), text_(text) {}

    void run() {
        out_.root = parse_sum();
        if (lex_.peek().kind != Token::Kind::End)
            throw ConfigError("trailing tokens in expression: " + text_);
    }

  private:
    int add_leaf(const std::string& name) {
        ParsedExpr::Node n;
        n.is_leaf = true;
        n.leaf = name;
        out_.nodes.push_back(n);
        return static_cast<int>(out_.nodes.size()) - 1;
    }

    int add_op(Op op, int a, int b = -1) {
        ParsedExpr::Node n;
        n.op = op;
        n.child[0] = a;
        n.child[1] = b;
        out_.nodes.push_back(n);
        return static_cast<int>(out_.nodes.size()) - 1;
    }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            auto k = lex_.peek().kind;
            if (k == Token::Kind::Plus) {
                lex_.take();
                lhs = add_op(Op::Add, lhs, parse_product());
            } else if (k == Token::Kind::Minus) {
                lex_.take();
                lhs = add_op(Op::Sub, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            auto k = lex_.peek().kind;
            if (k == Token::Kind::Star) {
                lex_.take();
                lhs = add_op(Op::Mul, lhs, parse_unary());
            } else if (k == Token::Kind::Slash) {
                lex_.take();
                lhs = add_op(Op::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (lex_.peek().kind == Token::Kind::Minus) {
            lex_.take();
            // -x is encoded as (0 - x); there is no dedicated negation op
            int zero = add_leaf("0");
            return add_op(Op::Sub, zero, parse_unary());
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_atom();
        if (lex_.peek().kind == Token::Kind::Caret) {
            lex_.take();
            // right associative
            int exponent = parse_unary();
            return add_op(Op::Pow, base, exponent);
        }
        return base;
    }

    int parse_atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::Kind::Number:
                return add_leaf(t.text);
            case Token::Kind::LParen: {
                int inner = parse_sum();
                if (lex_.take().kind != Token::Kind::RParen)
                    throw ConfigError("missing ')' in expression: " + text_);
                return inner;
            }
            case Token::Kind::Ident: {
                auto fn = function_table().find(t.text);
                if (fn != function_table().end() && lex_.peek().kind == Token::Kind::LParen) {
                    lex_.take();
                    int arg = parse_sum();
                    if (lex_.take().kind != Token::Kind::RParen)
                        throw ConfigError("missing ')' after " + t.text + " in: " + text_);
                    return add_op(fn->second, arg);
                }
                return add_leaf(t.text);
            }
            default:
                throw ConfigError("unexpected token '" + t.text + "' in expression: " + text_);
        }
    }

    Lexer lex_;
    ParsedExpr& out_;
    const std::string& text_;
};

}  // namespace

ParsedExpr parse_infix(const std::string& text) {
    ParsedExpr out;
    Parser p(text, out);
    p.run();
    return out;
}

}  // namespace spl
