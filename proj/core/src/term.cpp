#include "prooflog/term.hpp"

#include <algorithm>
#include <cctype>

namespace prooflog {

namespace {

BigInt pow10(int k) {
  BigInt v = 1;
  for (int i = 0; i < k; ++i) v *= 10;
  return v;
}

}  // namespace

std::string render_rational(const Rational& r) {
  const BigInt num = numerator(r);
  const BigInt den = denominator(r);
  if (den == 1) return num.str();

  // A finite decimal exists exactly when den = 2^a * 5^b; the minimal scale
  // guarantees no trailing zeros.
  BigInt d = den;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d == 1) {
    const int scale = std::max(twos, fives);
    const BigInt scaled = abs(num) * pow10(scale) / den;
    std::string digits = scaled.str();
    if (digits.size() <= static_cast<std::size_t>(scale)) {
      digits.insert(0, static_cast<std::size_t>(scale) + 1 - digits.size(),
                    '0');
    }
    const std::size_t point = digits.size() - static_cast<std::size_t>(scale);
    std::string out = num < 0 ? "-" : "";
    out += digits.substr(0, point);
    out += '.';
    out += digits.substr(point);
    return out;
  }
  return num.str() + "r" + den.str();
}

std::optional<Rational> parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const auto all_digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
      return std::isdigit(c) != 0;
    });
  };
  const auto dot = text.find('.');
  const auto slash = text.find('r');
  if (dot != std::string_view::npos) {
    const auto ip = text.substr(0, dot);
    const auto fp = text.substr(dot + 1);
    if (!all_digits(ip) || !all_digits(fp)) return std::nullopt;
    const BigInt scale = pow10(static_cast<int>(fp.size()));
    const BigInt units = BigInt(std::string(ip)) * scale + BigInt(std::string(fp));
    return Rational(units, scale);
  }
  if (slash != std::string_view::npos) {
    const auto np = text.substr(0, slash);
    const auto dp = text.substr(slash + 1);
    if (!all_digits(np) || !all_digits(dp)) return std::nullopt;
    const BigInt den{std::string(dp)};
    if (den == 0) return std::nullopt;
    return Rational(BigInt(std::string(np)), den);
  }
  if (!all_digits(text)) return std::nullopt;
  return Rational(BigInt(std::string(text)));
}

Term Term::var(std::string name, int index) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::variable;
  node->name = std::move(name);
  node->index = index;
  return Term(std::move(node));
}

Term Term::number(Rational value) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::number;
  node->value = std::move(value);
  return Term(std::move(node));
}

Term Term::atom(std::string name) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::atom;
  node->name = std::move(name);
  return Term(std::move(node));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) return atom(std::move(functor));
  auto node = std::make_shared<Node>();
  node->kind = Kind::compound;
  node->name = std::move(functor);
  node->args = std::move(args);
  return Term(std::move(node));
}

bool Term::structurally_equal(const Term& a, const Term& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::variable:
      return a.name() == b.name() && a.var_index() == b.var_index();
    case Kind::number:
      return a.number_value() == b.number_value();
    case Kind::atom:
      return a.name() == b.name();
    case Kind::compound: {
      if (a.name() != b.name() || a.arity() != b.arity()) return false;
      for (std::size_t i = 0; i < a.arity(); ++i) {
        if (!(a.args()[i] == b.args()[i])) return false;
      }
      return true;
    }
  }
  return false;
}

std::optional<Term> Substitution::lookup(const VarKey& key) const {
  const auto it = bindings_.find(key);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

void Substitution::bind(VarKey key, Term value) {
  bindings_.insert_or_assign(std::move(key), std::move(value));
}

namespace {

// Operator precedence for rendering; 0 marks plain functors. Mirrors the
// parser: comparisons/is 700 (non-assoc), additive 500, multiplicative 400,
// unary minus 200, all left-associative except 700.
int op_prec(const std::string& f, std::size_t arity) {
  if (arity == 2) {
    if (f == "is" || f == "=" || f == "==" || f == "\\==" || f == "=:=" ||
        f == "=\\=" || f == "<" || f == ">" || f == "=<" || f == ">=") {
      return 700;
    }
    if (f == "+" || f == "-") return 500;
    if (f == "*" || f == "/") return 400;
  }
  if (arity == 1 && f == "-") return 200;
  return 0;
}

void render_into(const Term& t, std::string& out);

void render_operand(const Term& t, int max_prec, std::string& out) {
  const int q = t.is_compound() ? op_prec(t.name(), t.arity()) : 0;
  if (q > max_prec) {
    out += '(';
    render_into(t, out);
    out += ')';
  } else {
    render_into(t, out);
  }
}

void render_into(const Term& t, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::variable:
      out += t.name();
      if (t.var_index() != 0) {
        out += '_';
        out += std::to_string(t.var_index());
      }
      return;
    case Term::Kind::number:
      out += render_rational(t.number_value());
      return;
    case Term::Kind::atom:
      out += t.name();
      return;
    case Term::Kind::compound: {
      const int p = op_prec(t.name(), t.arity());
      if (p == 0) {
        out += t.name();
        out += '(';
        for (std::size_t i = 0; i < t.arity(); ++i) {
          if (i > 0) out += ", ";
          render_into(t.args()[i], out);
        }
        out += ')';
        return;
      }
      if (t.arity() == 1) {  // unary minus
        out += '-';
        render_operand(t.args()[0], p - 1, out);
        return;
      }
      const bool non_assoc = p == 700;
      render_operand(t.args()[0], non_assoc ? p - 1 : p, out);
      out += ' ';
      out += t.name();
      out += ' ';
      render_operand(t.args()[1], p - 1, out);
      return;
    }
  }
}

}  // namespace

std::string canonical_render(const Term& t) {
  std::string out;
  render_into(t, out);
  return out;
}

}  // namespace prooflog
