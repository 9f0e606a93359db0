#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace cppl {

// Stream tags used to derive independent generators from one seed.
enum class Stream : std::uint32_t {
  kEnvironment = 1,
  kPolicy = 2,
  kTheta = 3,
  kContext = 4,
  kFeedback = 5,
  kOrder = 6,
};

class Rng {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Generator seeded from a list of words, e.g. {seed, stream, round}.
  static Rng derive(std::initializer_list<std::uint64_t> words) {
    std::vector<std::uint32_t> parts;
    parts.reserve(words.size() * 2);
    for (std::uint64_t w : words) {
      parts.push_back(static_cast<std::uint32_t>(w & 0xffffffffu));
      parts.push_back(static_cast<std::uint32_t>(w >> 32));
    }
    std::seed_seq seq(parts.begin(), parts.end());
    Rng rng(0);
    rng.engine_.seed(seq);
    return rng;
  }

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
  }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace cppl
