#pragma once

#include <cmath>
#include <string>

#include "iphs/ad/tape.hpp"
#include "iphs/error.hpp"

namespace iphs::ad {

/// Scalar handle on a tape node. A Var without a tape is a plain constant,
/// which lets generic model code start accumulators at zero.
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT: implicit by design of generic code
  Var(Tape& tape, NodeId id) : tape_(&tape), id_(id), value_(tape.value(id)) {}

  double value() const noexcept { return value_; }
  NodeId id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = kNoParent;
  double value_ = 0.0;
};

/// New leaf on `tape` holding `value`.
inline Var make_leaf(Tape& tape, double value) { return Var(tape, tape.leaf(value)); }

namespace detail {

inline Var unary(const Var& a, Op op, double value, double da, double c = 0.0) {
  Tape& t = *a.tape();
  return Var(t, t.unary(op, a.id(), value, da, c));
}

[[noreturn]] inline void domain_error(const char* what, const Var& a) {
  throw NumericError(std::string(what) + " at operand node " +
                     (a.is_constant() ? std::string("<constant>") : std::to_string(a.id())) +
                     " (value " + std::to_string(a.value()) + ")");
}

}  // namespace detail

// Plain-double primitives, shared with the tape so forward values agree.

inline double sigmoid(double x) { return apply(Op::Sigmoid, x, 0.0, 0.0); }
inline double softplus(double x) { return apply(Op::Softplus, x, 0.0, 0.0); }
inline double log_cosh(double x) { return apply(Op::LogCosh, x, 0.0, 0.0); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double pow(double x, double p) { return std::pow(x, p); }
inline double abs(double x) { return std::fabs(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

inline Var operator+(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.value() + b.value());
  if (a.is_constant()) return detail::unary(b, Op::AddConst, b.value() + a.value(), 1.0, a.value());
  if (b.is_constant()) return detail::unary(a, Op::AddConst, a.value() + b.value(), 1.0, b.value());
  Tape& t = *a.tape();
  return Var(t, t.binary(Op::Add, a.id(), b.id(), a.value() + b.value(), 1.0, 1.0));
}

inline Var operator-(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.value() - b.value());
  if (a.is_constant()) return detail::unary(b, Op::ConstSub, a.value() - b.value(), -1.0, a.value());
  if (b.is_constant()) return detail::unary(a, Op::AddConst, a.value() + (-b.value()), 1.0, -b.value());
  Tape& t = *a.tape();
  return Var(t, t.binary(Op::Sub, a.id(), b.id(), a.value() - b.value(), 1.0, -1.0));
}

inline Var operator*(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.value() * b.value());
  if (a.is_constant()) return detail::unary(b, Op::MulConst, b.value() * a.value(), a.value(), a.value());
  if (b.is_constant()) return detail::unary(a, Op::MulConst, a.value() * b.value(), b.value(), b.value());
  Tape& t = *a.tape();
  return Var(t, t.binary(Op::Mul, a.id(), b.id(), a.value() * b.value(), b.value(), a.value()));
}

inline Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) detail::domain_error("division by zero", b);
  if (a.is_constant() && b.is_constant()) return Var(a.value() / b.value());
  const double q = a.value() / b.value();
  if (a.is_constant()) return detail::unary(b, Op::ConstDiv, q, -q / b.value(), a.value());
  if (b.is_constant()) return detail::unary(a, Op::DivConst, q, 1.0 / b.value(), b.value());
  Tape& t = *a.tape();
  return Var(t, t.binary(Op::Div, a.id(), b.id(), q, 1.0 / b.value(), -q / b.value()));
}

inline Var operator-(const Var& a) {
  if (a.is_constant()) return Var(-a.value());
  return detail::unary(a, Op::Neg, -a.value(), -1.0);
}

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline Var exp(const Var& a) {
  const double v = std::exp(a.value());
  if (a.is_constant()) return Var(v);
  return detail::unary(a, Op::Exp, v, v);
}

inline Var log(const Var& a) {
  if (!(a.value() > 0.0)) detail::domain_error("log of non-positive value", a);
  const double v = std::log(a.value());
  if (a.is_constant()) return Var(v);
  return detail::unary(a, Op::Log, v, 1.0 / a.value());
}

inline Var pow(const Var& a, double p) {
  const double v = std::pow(a.value(), p);
  if (a.is_constant()) return Var(v);
  return detail::unary(a, Op::PowConst, v, p * std::pow(a.value(), p - 1.0), p);
}

inline Var tanh(const Var& a) {
  const double v = std::tanh(a.value());
  if (a.is_constant()) return Var(v);
  return detail::unary(a, Op::Tanh, v, 1.0 - v * v);
}

inline Var sigmoid(const Var& a) {
  const double s = sigmoid(a.value());
  if (a.is_constant()) return Var(s);
  return detail::unary(a, Op::Sigmoid, s, s * (1.0 - s));
}

inline Var softplus(const Var& a) {
  const double v = softplus(a.value());
  if (a.is_constant()) return Var(v);
  return detail::unary(a, Op::Softplus, v, sigmoid(a.value()));
}

inline Var log_cosh(const Var& a) {
  const double v = log_cosh(a.value());
  if (a.is_constant()) return Var(v);
  return detail::unary(a, Op::LogCosh, v, std::tanh(a.value()));
}

inline Var abs(const Var& a) {
  const double x = a.value();
  if (a.is_constant()) return Var(std::fabs(x));
  return detail::unary(a, Op::Abs, std::fabs(x), x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
}

inline Var sqrt(const Var& a) {
  if (a.value() < 0.0) detail::domain_error("sqrt of negative value", a);
  const double v = std::sqrt(a.value());
  if (a.is_constant()) return Var(v);
  if (v == 0.0) detail::domain_error("sqrt derivative at zero", a);
  return detail::unary(a, Op::Sqrt, v, 0.5 / v);
}

}  // namespace iphs::ad
