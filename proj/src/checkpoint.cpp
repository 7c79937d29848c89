#include "snls/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "snls/errors.hpp"

namespace snls {
namespace {

constexpr char kMagic[4] = {'N', 'L', 'S', 'E'};

class Writer {
 public:
  template <class T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
  std::vector<char> bytes;
};

class Reader {
 public:
  explicit Reader(std::vector<char> data) : data_(std::move(data)) {}

  template <class T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    if (pos_ + sizeof(U) > data_.size()) throw CheckpointError(std::string("checkpoint truncated in ") + what);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }
  const std::vector<char>& data() const { return data_; }
  void skip(std::size_t n) { pos_ += n; }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const State& state, const SimParams& params, const std::string& path) {
  const Field u = state.field.physical_copy();
  const Grid& g = u.grid();
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::int32_t>(g.dim());
  w.put<std::int32_t>(g.points_per_axis());
  w.put<double>(g.length());
  w.put<double>(state.t);
  w.put<std::int32_t>(params.scheme == Scheme::lie ? 0 : 1);
  w.put<double>(params.lambda);
  w.put<double>(params.sigma);
  w.put<std::int32_t>(params.alpha);
  for (const Complex& c : u.values()) {
    w.put<double>(c.real());
    w.put<double>(c.imag());
  }
  const auto& words = state.rng.state();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(words.size()));
  for (auto word : words) w.put<std::uint64_t>(word);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));
  if (r.data().size() < 4 || std::memcmp(r.data().data(), kMagic, 4) != 0)
    throw CheckpointError("checkpoint " + path + ": bad magic (expected NLSE)");
  r.skip(4);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint " + path + ": version " + std::to_string(version) +
                          " not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  const int d = r.get<std::int32_t>("header");
  const int n = r.get<std::int32_t>("header");
  const double length = r.get<double>("header");
  const double t = r.get<double>("header");
  const int scheme = r.get<std::int32_t>("header");
  if (scheme != 0 && scheme != 1) throw CheckpointError("checkpoint " + path + ": unknown scheme");
  const double lambda = r.get<double>("header");
  const double sigma = r.get<double>("header");
  const int alpha = r.get<std::int32_t>("header");

  GridPtr grid;
  try {
    grid = Grid::make(d, n, length);
  } catch (const ConfigError& e) {
    throw CheckpointError("checkpoint " + path + ": invalid grid header (" + e.what() + ")");
  }
  Field u(grid);
  for (Complex& c : u.values()) {
    const double re = r.get<double>("payload");
    const double im = r.get<double>("payload");
    c = Complex(re, im);
  }
  const auto count = r.get<std::uint32_t>("rng state");
  if (count != RandomStream::kStateWords)
    throw CheckpointError("checkpoint " + path + ": unexpected rng word count " + std::to_string(count));
  RandomStream::StateWords words{};
  for (auto& word : words) word = r.get<std::uint64_t>("rng state");
  if (!r.at_end()) throw CheckpointError("checkpoint " + path + ": trailing bytes");
  return Checkpoint{State{std::move(u), t, RandomStream(words)},
                    scheme == 0 ? Scheme::lie : Scheme::strang, lambda, sigma, alpha};
}

}  // namespace snls
