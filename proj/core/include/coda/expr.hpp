#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coda::kmodel {

// Integer expression over kernel symbols: threadIdx.{x,y}, blockIdx.{x,y},
// blockDim.{x,y}, gridDim.{x,y}, named parameters and one optional loop
// variable. Operators: + - * and integer constants.
class Expr {
public:
    enum class Kind : std::uint8_t { Const, Sym, Add, Sub, Mul, Neg };

    struct Node {
        Kind kind;
        std::int64_t value = 0; // Const
        std::string name;       // Sym
        std::shared_ptr<const Node> lhs, rhs;
    };

    Expr() = default;
    static Expr constant(std::int64_t v);
    static Expr symbol(std::string name);
    static Expr add(Expr a, Expr b);
    static Expr sub(Expr a, Expr b);
    static Expr mul(Expr a, Expr b);
    static Expr neg(Expr a);

    // Parses an infix expression ("(blockIdx.x*blockDim.x+threadIdx.x)*n + i").
    // Throws ConfigError on syntax errors.
    static Expr parse(const std::string& text);

    bool empty() const { return !root_; }
    const Node* root() const { return root_.get(); }
    std::int64_t eval(const std::function<std::optional<std::int64_t>(const std::string&)>& lookup) const;
    void collect_symbols(std::vector<std::string>& out) const;
    std::string to_string() const;

private:
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

// Result of folding an expression into an affine form over the run-time
// symbols (thread/block indices and the loop variable) with all
// invocation-constant symbols substituted. affine == false means a product of
// two non-constant subexpressions was encountered.
struct LinearForm {
    bool affine = true;
    std::int64_t constant = 0;
    std::map<std::string, std::int64_t> coeffs; // runtime symbol -> coefficient

    std::int64_t coeff(const std::string& sym) const {
        auto it = coeffs.find(sym);
        return it == coeffs.end() ? 0 : it->second;
    }
};

// `constants` resolves invocation-constant symbols; any symbol it does not
// resolve stays symbolic. Throws ConfigError for symbols in `reject`.
LinearForm linearize(const Expr& e,
                     const std::function<std::optional<std::int64_t>(const std::string&)>& constants);

} // namespace coda::kmodel
