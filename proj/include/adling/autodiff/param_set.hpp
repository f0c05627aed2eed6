#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adling/autodiff/tensor.hpp"

namespace adling::ad {

/// Named trainable tensors, iterated in name order.
class ParamSet {
 public:
  void add(const std::string& name, Tensor value);  // throws UsageError on duplicates
  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t element_count() const;
  std::vector<std::string> names() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Same names and shapes, all zeros.
  ParamSet zeros_like() const;
  void fill(double value);

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::map<std::string, Tensor> entries_;
};

// Binary container: magic "ADLN1", then per entry a little-endian u32 name
// length, the UTF-8 name, u32 rank, u64 dimensions and little-endian
// IEEE-754 doubles.
std::string serialize_params(const ParamSet& params);
ParamSet deserialize_params(const std::string& bytes);
void save_params(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_params(const std::filesystem::path& path);

}  // namespace adling::ad
