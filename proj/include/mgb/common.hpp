#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgb {

using Vertex = std::uint32_t;
using Dist = std::uint16_t;

inline constexpr Dist kUnreachable = 0xFFFF;
inline constexpr Vertex kNoVertex = 0xFFFFFFFFu;

// Sorted, duplicate free.
using VertexSet = std::vector<Vertex>;
// Consecutive entries need not be adjacent for discrete paths.
using Path = std::vector<Vertex>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GraphError : public Error {
 public:
  GraphError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class BundleError : public Error {
 public:
  BundleError(std::string axiom, std::vector<Vertex> witness,
              const std::string& what)
      : Error(what), axiom_(std::move(axiom)), witness_(std::move(witness)) {}
  const std::string& axiom() const { return axiom_; }
  const std::vector<Vertex>& witness() const { return witness_; }

 private:
  std::string axiom_;
  std::vector<Vertex> witness_;
};

// Exact value in (1/2)Z, stored doubled.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(std::int64_t t) {
    HalfInt h;
    h.twice_ = t;
    return h;
  }
  static constexpr HalfInt from_int(std::int64_t v) { return from_twice(2 * v); }

  constexpr std::int64_t twice() const { return twice_; }
  constexpr double value() const { return static_cast<double>(twice_) / 2.0; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  // Rounds toward negative infinity.
  constexpr std::int64_t floor() const {
    return twice_ >= 0 ? twice_ / 2 : -((-twice_ + 1) / 2);
  }
  constexpr std::int64_t ceil() const { return -from_twice(-twice_).floor(); }

  constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
  constexpr HalfInt operator*(std::int64_t k) const { return from_twice(twice_ * k); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;

 private:
  std::int64_t twice_ = 0;
};

inline VertexSet make_vertex_set(std::vector<Vertex> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace mgb
