#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpcwb/kernels/backend.hpp"
#include "hpcwb/kernels/spec.hpp"

namespace hpcwb {

/// One runnable (kernel, backend) combination.
struct Variant {
  KernelSpec spec;
  std::shared_ptr<const Backend> backend;

  std::string label() const { return spec.id + "@" + std::string(backend->name()); }
};

/// Selects variants. Unset fields match anything.
struct VariantFilter {
  std::optional<Operation> operation;
  std::optional<Precision> precision;
  std::optional<Layout> layout;
  std::optional<std::string> kernel_id;
  std::optional<std::string> backend;

  /// "all", an operation name ("dot") or a kernel id ("dot_f64").
  static VariantFilter parse(std::string_view text) {
    VariantFilter f;
    if (text == "all") return f;
    if (auto op = parse_operation(text)) {
      f.operation = op;
    } else {
      f.kernel_id = std::string(text);
    }
    return f;
  }

  bool matches(const KernelSpec& s, const Backend& b) const {
    if (operation && s.operation != *operation) return false;
    if (precision && s.precision != *precision) return false;
    if (layout && s.layout != *layout) return false;
    if (kernel_id && s.id != *kernel_id) return false;
    if (backend && b.name() != *backend) return false;
    return true;
  }
};

/// Immutable after construction.
class Registry {
 public:
  Registry(std::vector<KernelSpec> specs, std::vector<std::shared_ptr<const Backend>> backends)
      : specs_(std::move(specs)), backends_(std::move(backends)) {
    std::sort(specs_.begin(), specs_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::sort(backends_.begin(), backends_.end(), [](const auto& a, const auto& b) { return a->name() < b->name(); });
  }

  const std::vector<KernelSpec>& specs() const noexcept { return specs_; }
  const std::vector<std::shared_ptr<const Backend>>& backends() const noexcept { return backends_; }

  /// Matching combinations ordered by (kernel id, backend name).
  std::vector<Variant> list_variants(const VariantFilter& filter = {}) const {
    std::vector<Variant> out;
    for (const auto& s : specs_)
      for (const auto& b : backends_)
        if (filter.matches(s, *b)) out.push_back({s, b});
    return out;
  }

  std::optional<KernelSpec> find_spec(std::string_view id) const {
    for (const auto& s : specs_)
      if (s.id == id) return s;
    return std::nullopt;
  }

  std::shared_ptr<const Backend> find_backend(std::string_view name) const {
    for (const auto& b : backends_)
      if (b->name() == name) return b;
    return nullptr;
  }

  std::vector<std::string> backend_names() const {
    std::vector<std::string> names;
    for (const auto& b : backends_) names.emplace_back(b->name());
    return names;
  }

  std::vector<std::string> kernel_ids() const {
    std::vector<std::string> ids;
    for (const auto& s : specs_) ids.push_back(s.id);
    return ids;
  }

  /// Every operation in both precisions, dense_mv in both layouts.
  static std::vector<KernelSpec> standard_specs() {
    std::vector<KernelSpec> specs;
    for (auto op : kAllOperations)
      for (auto p : kAllPrecisions) {
        if (has_layout(op)) {
          specs.push_back(KernelSpec::make(op, p, Layout::row_major));
          specs.push_back(KernelSpec::make(op, p, Layout::col_major));
        } else {
          specs.push_back(KernelSpec::make(op, p));
        }
      }
    return specs;
  }

 private:
  std::vector<KernelSpec> specs_;
  std::vector<std::shared_ptr<const Backend>> backends_;
};

enum class Trap { unaligned, unordered };

/// The reference and optimized backends, plus any requested planted-bug backends.
inline Registry make_registry(const std::vector<Trap>& traps = {}) {
  std::vector<std::shared_ptr<const Backend>> backends{std::make_shared<ReferenceBackend>(),
                                                       std::make_shared<OptimizedBackend>()};
  for (auto t : traps) {
    if (t == Trap::unaligned) backends.push_back(std::make_shared<UnalignedDropBackend>());
    if (t == Trap::unordered) backends.push_back(std::make_shared<UnorderedReduceBackend>());
  }
  return Registry(Registry::standard_specs(), std::move(backends));
}

}  // namespace hpcwb
