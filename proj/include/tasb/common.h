// Copyright 2026 The tasb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TASB_COMMON_H_
#define TASB_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace tasb {

// Row-major storage throughout: rows are items (passages, queries, feature
// buckets) and the hot loops walk one item at a time.
template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXd = RowMatrix<double>;

// All hard failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Warnings go to stderr unless silenced (tests silence them).
void log_warning(std::string_view message);
void set_warnings_enabled(bool enabled);

// 64-bit FNV-1a. Fixed algorithm so feature hashing and token embeddings are
// identical on every platform and run.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t basis = 0xcbf29ce484222325ULL) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded generator with distribution code written out explicitly: the
// standard library distributions differ between implementations, and the
// batch sequence must be reproducible from the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform(std::uint64_t n);

  // Uniform real in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// k distinct indices from [0, n), in draw order. Uniform over ordered
// k-subsets (partial Fisher-Yates over a sparse swap map).
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng);

// Per-component seeds derived from one global seed.
enum class SeedSlot : std::uint64_t {
  kModelInit = 1,
  kTeacherTable = 2,
  kClustering = 3,
  kSampler = 4,
  kValidation = 5,
  kSynthetic = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t global, SeedSlot slot) {
  return splitmix64(global + 0x1000ULL * static_cast<std::uint64_t>(slot));
}

// Little-endian binary helpers for the checkpoint, cluster and index files.
void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, std::string_view s);
std::uint8_t read_u8(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
void expect_magic(std::istream& in, std::string_view magic,
                  const std::filesystem::path& path);

// Writes via a sibling temporary file and renames on success, so a crash
// never leaves a half-written output behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer,
                       bool binary = false);

std::vector<std::string> split(std::string_view s, char delim);
std::vector<std::string> split_whitespace(std::string_view s);
std::string_view trim(std::string_view s);
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

// Fixed six-decimal formatting used by every TSV and run writer.
std::string format_fixed(double v, int decimals = 6);

}  // namespace tasb

#endif  // TASB_COMMON_H_
