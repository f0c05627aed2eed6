#include "adling/autodiff/param_set.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "adling/error.hpp"

namespace adling::ad {
namespace {

constexpr std::string_view kMagic = "ADLN1";

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  bool done() const { return pos_ == bytes_.size(); }

  template <typename T>
  T get_le() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(0, "truncated parameter container");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void ParamSet::add(const std::string& name, Tensor value) {
  if (!entries_.emplace(name, std::move(value)).second) throw UsageError("duplicate parameter '" + name + "'");
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw LookupError("no parameter named '" + name + "'");
  return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw LookupError("no parameter named '" + name + "'");
  return it->second;
}

std::size_t ParamSet::element_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : entries_) out.push_back(name);
  return out;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [name, t] : entries_) out.add(name, Tensor(t.shape(), 0.0));
  return out;
}

void ParamSet::fill(double value) {
  for (auto& [name, t] : entries_) t.fill(value);
}

std::string serialize_params(const ParamSet& params) {
  std::string out(kMagic);
  for (const auto& [name, t] : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ParamSet deserialize_params(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) throw FormatError(0, "missing ADLN1 magic");
  Reader reader(bytes);
  reader.get_bytes(kMagic.size());
  ParamSet params;
  while (!reader.done()) {
    const auto name_len = reader.get_le<std::uint32_t>();
    std::string name = reader.get_bytes(name_len);
    const auto rank = reader.get_le<std::uint32_t>();
    if (rank == 0 || rank > 3) throw FormatError(0, "parameter '" + name + "' has invalid rank");
    Shape shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(reader.get_le<std::uint64_t>());
      if (d == 0 || d > (std::size_t{1} << 32)) throw FormatError(0, "parameter '" + name + "' has invalid shape");
      count *= d;
    }
    std::vector<double> data(count);
    for (double& v : data) v = std::bit_cast<double>(reader.get_le<std::uint64_t>());
    params.add(name, Tensor(std::move(shape), std::move(data)));
  }
  return params;
}

void save_params(const std::filesystem::path& path, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path.string());
  const std::string bytes = serialize_params(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ParamSet load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_params(buffer.str());
}

}  // namespace adling::ad
