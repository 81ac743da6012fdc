#pragma once

#include "quis/region_key.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace quis {

class FactorStore;

enum class NodeKind : std::uint8_t { Constant, FactorRef, Negate, Add, Sub, Mul, Div, Pow };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind = NodeKind::Constant;
    double constant = 0.0;
    std::string factor;
    ExprNodePtr lhs;  // operand of Negate
    ExprNodePtr rhs;
};

// Immutable arithmetic expression over location-factor references.
//
// Grammar, loosest to tightest binding:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          right-associative
//   atom   := number | identifier | '(' expr ')'
// so `-x^2` reads as -(x^2) and `2^-1` is accepted.
class MeansEndExpr {
public:
    MeansEndExpr() = default;
    explicit MeansEndExpr(ExprNodePtr root) : root_(std::move(root)) {}

    static MeansEndExpr constant(double v);
    static MeansEndExpr ref(std::string factor);
    static MeansEndExpr negate(const MeansEndExpr& operand);
    static MeansEndExpr binary(NodeKind op, const MeansEndExpr& lhs, const MeansEndExpr& rhs);

    const ExprNode& root() const { return *root_; }
    bool empty() const noexcept { return root_ == nullptr; }

    // Structural equality.
    bool operator==(const MeansEndExpr& other) const;

private:
    ExprNodePtr root_;
};

// Throws Error{SyntaxError} (message carries the 0-based column) or
// Error{EmptyExpression}.
MeansEndExpr parse_expression(std::string_view text);

// Minimal-parenthesis rendering that parses back to an equal tree.
std::string to_string(const MeansEndExpr& expr);

// Prefix form used in tests and debugging, e.g. "Div(Pow(Add(Ref ME1, ...".
std::string to_tree_string(const MeansEndExpr& expr);

std::set<std::string> referenced_factors(const MeansEndExpr& expr);

// Supplies the value of a factor reference; throws to signal absence.
using FactorResolver = std::function<double(const std::string& factor)>;

// Throws DivisionByZero or DomainError (non-real power, 0 to a negative
// power, any non-finite intermediate). Resolver exceptions propagate.
double evaluate(const MeansEndExpr& expr, const FactorResolver& resolve);

struct EvalContext {
    const FactorStore& store;
    RegionKey site;
    int year = 0;
};

// Looks factors up with FactorStore::value; a missing value becomes
// MissingFactorValue naming the factor and site.
double evaluate(const MeansEndExpr& expr, const EvalContext& ctx);

}  // namespace quis
