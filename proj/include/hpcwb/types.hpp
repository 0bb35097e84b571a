#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "hpcwb/error.hpp"

namespace hpcwb {

enum class Precision { f32, f64 };
enum class Layout { none, row_major, col_major };
enum class Operation { axpy, scale, dot, csr_spmv, dense_mv };
enum class TrafficModel { realistic, idealized };

inline constexpr std::array kAllPrecisions{Precision::f32, Precision::f64};
inline constexpr std::array kAllOperations{Operation::axpy, Operation::scale, Operation::dot,
                                           Operation::csr_spmv, Operation::dense_mv};
inline constexpr std::array kAllTrafficModels{TrafficModel::realistic, TrafficModel::idealized};

/// Bytes per element of a floating-point precision.
constexpr std::size_t element_size(Precision p) noexcept { return p == Precision::f32 ? 4 : 8; }

/// Row pointers and column indices are 32-bit.
inline constexpr std::size_t kIndexBytes = 4;

template <typename T>
constexpr Precision precision_of();
template <>
constexpr Precision precision_of<float>() { return Precision::f32; }
template <>
constexpr Precision precision_of<double>() { return Precision::f64; }

constexpr std::string_view to_string(Precision p) noexcept { return p == Precision::f32 ? "f32" : "f64"; }

constexpr std::string_view to_string(Layout l) noexcept {
  switch (l) {
    case Layout::row_major: return "row_major";
    case Layout::col_major: return "col_major";
    case Layout::none: break;
  }
  return "none";
}

constexpr std::string_view to_string(Operation op) noexcept {
  switch (op) {
    case Operation::axpy: return "axpy";
    case Operation::scale: return "scale";
    case Operation::dot: return "dot";
    case Operation::csr_spmv: return "csr_spmv";
    case Operation::dense_mv: return "dense_mv";
  }
  return "?";
}

constexpr std::string_view to_string(TrafficModel t) noexcept {
  return t == TrafficModel::realistic ? "realistic" : "idealized";
}

/// Accepts "f32"/"single"/"float" and "f64"/"double".
inline std::optional<Precision> parse_precision(std::string_view s) {
  if (s == "f32" || s == "single" || s == "float") return Precision::f32;
  if (s == "f64" || s == "double") return Precision::f64;
  return std::nullopt;
}

inline std::optional<Layout> parse_layout(std::string_view s) {
  if (s == "row_major" || s == "row") return Layout::row_major;
  if (s == "col_major" || s == "col") return Layout::col_major;
  if (s == "none") return Layout::none;
  return std::nullopt;
}

inline std::optional<Operation> parse_operation(std::string_view s) {
  for (auto op : kAllOperations)
    if (to_string(op) == s) return op;
  return std::nullopt;
}

inline std::optional<TrafficModel> parse_traffic_model(std::string_view s) {
  if (s == "realistic") return TrafficModel::realistic;
  if (s == "idealized") return TrafficModel::idealized;
  return std::nullopt;
}

/// Only dense_mv has a storage layout; the other operations are layout-neutral.
constexpr bool has_layout(Operation op) noexcept { return op == Operation::dense_mv; }

}  // namespace hpcwb
