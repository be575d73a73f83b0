#include "coda/expr.hpp"

#include <cctype>

#include "coda/errors.hpp"

namespace coda::kmodel {

namespace {

std::shared_ptr<const Expr::Node> make_node(Expr::Kind k, std::int64_t v, std::string name,
                                            std::shared_ptr<const Expr::Node> l = nullptr,
                                            std::shared_ptr<const Expr::Node> r = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->value = v;
    n->name = std::move(name);
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ConfigError("expression parse error at offset " + std::to_string(pos) + " in \"" +
                          text + "\": " + msg);
    }

    std::shared_ptr<const Expr::Node> parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = make_node(Expr::Kind::Add, 0, "", lhs, parse_term());
            else if (eat('-'))
                lhs = make_node(Expr::Kind::Sub, 0, "", lhs, parse_term());
            else
                return lhs;
        }
    }

    std::shared_ptr<const Expr::Node> parse_term() {
        auto lhs = parse_factor();
        while (eat('*')) lhs = make_node(Expr::Kind::Mul, 0, "", lhs, parse_factor());
        return lhs;
    }

    std::shared_ptr<const Expr::Node> parse_factor() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of expression");
        const char c = text[pos];
        if (c == '(') {
            ++pos;
            auto inner = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (c == '-') {
            ++pos;
            return make_node(Expr::Kind::Neg, 0, "", parse_factor());
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::int64_t v = 0;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                v = v * 10 + (text[pos++] - '0');
            return make_node(Expr::Kind::Const, v, "");
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                    text[pos] == '.'))
                ++pos;
            return make_node(Expr::Kind::Sym, 0, text.substr(start, pos - start));
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

Expr Expr::constant(std::int64_t v) { return Expr(make_node(Kind::Const, v, "")); }
Expr Expr::symbol(std::string name) { return Expr(make_node(Kind::Sym, 0, std::move(name))); }
Expr Expr::add(Expr a, Expr b) { return Expr(make_node(Kind::Add, 0, "", a.root_, b.root_)); }
Expr Expr::sub(Expr a, Expr b) { return Expr(make_node(Kind::Sub, 0, "", a.root_, b.root_)); }
Expr Expr::mul(Expr a, Expr b) { return Expr(make_node(Kind::Mul, 0, "", a.root_, b.root_)); }
Expr Expr::neg(Expr a) { return Expr(make_node(Kind::Neg, 0, "", a.root_)); }

Expr Expr::parse(const std::string& text) {
    Parser p{text};
    auto root = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return Expr(root);
}

namespace {

std::int64_t eval_node(const Expr::Node& n,
                       const std::function<std::optional<std::int64_t>(const std::string&)>& lookup) {
    switch (n.kind) {
        case Expr::Kind::Const: return n.value;
        case Expr::Kind::Sym: {
            auto v = lookup(n.name);
            if (!v) throw ConfigError("unbound symbol '" + n.name + "' in expression");
            return *v;
        }
        case Expr::Kind::Add: return eval_node(*n.lhs, lookup) + eval_node(*n.rhs, lookup);
        case Expr::Kind::Sub: return eval_node(*n.lhs, lookup) - eval_node(*n.rhs, lookup);
        case Expr::Kind::Mul: return eval_node(*n.lhs, lookup) * eval_node(*n.rhs, lookup);
        case Expr::Kind::Neg: return -eval_node(*n.lhs, lookup);
    }
    throw InvariantError("bad expression node");
}

void collect_node(const Expr::Node& n, std::vector<std::string>& out) {
    switch (n.kind) {
        case Expr::Kind::Sym: out.push_back(n.name); return;
        case Expr::Kind::Const: return;
        default:
            if (n.lhs) collect_node(*n.lhs, out);
            if (n.rhs) collect_node(*n.rhs, out);
    }
}

std::string render(const Expr::Node& n) {
    switch (n.kind) {
        case Expr::Kind::Const: return std::to_string(n.value);
        case Expr::Kind::Sym: return n.name;
        case Expr::Kind::Add: return "(" + render(*n.lhs) + " + " + render(*n.rhs) + ")";
        case Expr::Kind::Sub: return "(" + render(*n.lhs) + " - " + render(*n.rhs) + ")";
        case Expr::Kind::Mul: return "(" + render(*n.lhs) + " * " + render(*n.rhs) + ")";
        case Expr::Kind::Neg: return "(-" + render(*n.lhs) + ")";
    }
    return "?";
}

LinearForm lin_node(const Expr::Node& n,
                    const std::function<std::optional<std::int64_t>(const std::string&)>& constants) {
    LinearForm out;
    switch (n.kind) {
        case Expr::Kind::Const:
            out.constant = n.value;
            return out;
        case Expr::Kind::Sym: {
            if (auto v = constants(n.name)) {
                out.constant = *v;
            } else {
                out.coeffs[n.name] = 1;
            }
            return out;
        }
        case Expr::Kind::Neg: {
            out = lin_node(*n.lhs, constants);
            out.constant = -out.constant;
            for (auto& [k, v] : out.coeffs) v = -v;
            return out;
        }
        case Expr::Kind::Add:
        case Expr::Kind::Sub: {
            LinearForm a = lin_node(*n.lhs, constants);
            LinearForm b = lin_node(*n.rhs, constants);
            const std::int64_t sign = n.kind == Expr::Kind::Add ? 1 : -1;
            if (!a.affine || !b.affine) {
                out.affine = false;
                return out;
            }
            out = std::move(a);
            out.constant += sign * b.constant;
            for (const auto& [k, v] : b.coeffs) out.coeffs[k] += sign * v;
            return out;
        }
        case Expr::Kind::Mul: {
            LinearForm a = lin_node(*n.lhs, constants);
            LinearForm b = lin_node(*n.rhs, constants);
            if (!a.affine || !b.affine) {
                out.affine = false;
                return out;
            }
            if (!a.coeffs.empty() && !b.coeffs.empty()) {
                out.affine = false; // product of two runtime-dependent terms
                return out;
            }
            const LinearForm& var = a.coeffs.empty() ? b : a;
            const std::int64_t scale = a.coeffs.empty() ? a.constant : b.constant;
            out.constant = var.constant * scale;
            for (const auto& [k, v] : var.coeffs)
                if (v * scale != 0) out.coeffs[k] = v * scale;
            return out;
        }
    }
    throw InvariantError("bad expression node");
}

} // namespace

std::int64_t Expr::eval(
    const std::function<std::optional<std::int64_t>(const std::string&)>& lookup) const {
    if (!root_) throw ConfigError("empty expression");
    return eval_node(*root_, lookup);
}

void Expr::collect_symbols(std::vector<std::string>& out) const {
    if (root_) collect_node(*root_, out);
}

std::string Expr::to_string() const { return root_ ? render(*root_) : ""; }

LinearForm linearize(
    const Expr& e,
    const std::function<std::optional<std::int64_t>(const std::string&)>& constants) {
    if (!e.root()) throw ConfigError("empty expression");
    return lin_node(*e.root(), constants);
}

} // namespace coda::kmodel
