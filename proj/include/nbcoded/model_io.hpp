#ifndef NBCODED_MODEL_IO_HPP
#define NBCODED_MODEL_IO_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nbcoded/errors.hpp"
#include "nbcoded/pipeline.hpp"

/// `.nbc` model files.
///
/// Layout, all integers and IEEE-754 doubles little-endian:
///
///     offset  size  field
///     0       4     magic "NBCD"
///     4       2     u16 format version (1)
///     6       1     u8 model kind (0 empty, 1 NBcoded, 2 Naive Bayes, 3 MLP)
///     7       4     u32 payload length N
///     11      N     payload
///     11+N    4     u32 CRC-32 (zlib polynomial) of the payload
///
/// Payload sections, in order per kind:
///
///     NBcoded      u64 seed, normalizer, network (encoder), nb,
///                  u8 has_offsets [, u32 n, f64 offsets[n]]
///     Naive Bayes  normalizer, nb
///     MLP          normalizer, network
///
///     normalizer   u32 n, n x (u16 len, name bytes), f64 min[n], f64 max[n]
///     network      u8 hidden activation, u8 output activation, u32 count,
///                  u32 sizes[count], then per layer f64 weights (out x in,
///                  row-major) and f64 biases[out]
///     nb           u8 family, u32 features d, u64 class_count[2],
///                  f64 log_prior[2], then
///                    gaussian:   f64 mean[2 x d], f64 variance[2 x d]
///                    bernoulli:  f64 threshold, f64 alpha,
///                                f64 log_p[2 x d], f64 log_q[2 x d]
///                    complement: f64 alpha, f64 weight[2 x d]
///
/// Class-by-feature blocks are row-major (class 0 first).
namespace nbcoded::model_io {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'N', 'B', 'C', 'D'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 11;
inline constexpr std::size_t kTrailerBytes = 4;

enum class ModelKind : std::uint8_t { kEmpty = 0, kNBcoded = 1, kNaiveBayes = 2, kMlp = 3 };

struct EmptyModel {};

using Model = std::variant<EmptyModel, pipeline::NBcodedModel, pipeline::NaiveBayesModel,
                           pipeline::MlpModel>;

enum class ErrorKind { kBadMagic, kUnsupportedVersion, kChecksumMismatch, kTruncated, kMalformed,
                       kNonFinite, kIo };

class ModelIoError : public Error {
public:
    ModelIoError(ErrorKind kind, const std::string &what) : Error(what), kind_{kind} {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

using Bytes = std::vector<std::uint8_t>;

/// Deterministic encoding; throws ModelIoError(kNonFinite) for NaN/inf parameters.
Bytes serialize(const Model &model);

/// Throws ModelIoError with a kind naming the first problem found.
Model deserialize(std::span<const std::uint8_t> bytes);

/// Like deserialize, but kMalformed when the file holds a different kind.
template <typename T>
T deserialize_as(std::span<const std::uint8_t> bytes) {
    auto model = deserialize(bytes);
    if (auto *typed = std::get_if<T>(&model)) {
        return std::move(*typed);
    }
    throw ModelIoError(ErrorKind::kMalformed, "model file holds a different model kind");
}

/// Number of f64 values in the serialized nb section of `nb`.
std::size_t nb_parameter_count(const naive_bayes::NBModel &nb);

void save(const std::string &path, const Model &model);
Model load(const std::string &path);

} // namespace nbcoded::model_io

#endif
