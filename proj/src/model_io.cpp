#include "nbcoded/model_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include <zlib.h>

namespace nbcoded::model_io {

namespace {

using naive_bayes::ClassMatrix;
using naive_bayes::Family;

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large payloads in chunks.
    constexpr std::size_t kChunk = 1u << 30;
    for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
        const auto n = std::min(kChunk, bytes.size() - off);
        crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    }
    return static_cast<std::uint32_t>(crc);
}

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint64_t v) {
        if (v > std::numeric_limits<std::uint32_t>::max()) {
            throw ModelIoError(ErrorKind::kMalformed, "dimension does not fit in 32 bits");
        }
        le(v, 4);
    }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) {
        if (!std::isfinite(v)) {
            throw ModelIoError(ErrorKind::kNonFinite, "cannot serialize a non-finite parameter");
        }
        le(std::bit_cast<std::uint64_t>(v), 8);
    }
    void str(const std::string &s) {
        if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw ModelIoError(ErrorKind::kMalformed, "column name too long");
        }
        u16(static_cast<std::uint16_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    template <typename Derived>
    void block(const Eigen::DenseBase<Derived> &m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                f64(m(r, c));
            }
        }
    }

    Bytes take() { return std::move(out_); }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    Bytes out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_{in} {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() {
        const double v = std::bit_cast<double>(le(8));
        if (!std::isfinite(v)) {
            throw ModelIoError(ErrorKind::kNonFinite, "model file contains a non-finite value");
        }
        return v;
    }
    std::string str() {
        const auto n = u16();
        need(n);
        std::string s(reinterpret_cast<const char *>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    template <typename M>
    void block(M &m, Eigen::Index rows, Eigen::Index cols) {
        need(static_cast<std::size_t>(rows * cols) * 8);
        m.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                m(r, c) = f64();
            }
        }
    }
    /// Guards a count read from the file against the bytes actually left.
    std::size_t count(std::size_t element_bytes) {
        const std::size_t n = u32();
        need(n * element_bytes);
        return n;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) {
            throw ModelIoError(ErrorKind::kTruncated, "model payload is truncated");
        }
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

[[noreturn]] void malformed(const std::string &what) {
    throw ModelIoError(ErrorKind::kMalformed, "malformed model file: " + what);
}

void write(Writer &w, const preprocess::Normalizer &norm) {
    w.u32(norm.cols());
    for (const auto &name : norm.column_names) {
        w.str(name);
    }
    w.block(norm.min.transpose());
    w.block(norm.max.transpose());
}

preprocess::Normalizer read_normalizer(Reader &r) {
    preprocess::Normalizer norm;
    const auto n = r.count(2);
    for (std::size_t i = 0; i < n; ++i) {
        norm.column_names.push_back(r.str());
    }
    Eigen::RowVectorXd lo, hi;
    r.block(lo, 1, static_cast<Eigen::Index>(n));
    r.block(hi, 1, static_cast<Eigen::Index>(n));
    norm.min = lo.transpose();
    norm.max = hi.transpose();
    if ((norm.min.array() > norm.max.array()).any()) {
        malformed("normalizer min exceeds max");
    }
    return norm;
}

void write(Writer &w, const neuralnet::Network &net) {
    w.u8(static_cast<std::uint8_t>(net.spec.hidden));
    w.u8(static_cast<std::uint8_t>(net.spec.output));
    w.u32(net.spec.sizes.size());
    for (auto s : net.spec.sizes) {
        w.u32(s);
    }
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        w.block(net.weights[l]);
        w.block(net.biases[l].transpose());
    }
}

neuralnet::Activation read_activation(Reader &r) {
    const auto a = r.u8();
    if (a > 1) {
        malformed("unknown activation " + std::to_string(a));
    }
    return static_cast<neuralnet::Activation>(a);
}

neuralnet::Network read_network(Reader &r) {
    neuralnet::Network net;
    net.spec.hidden = read_activation(r);
    net.spec.output = read_activation(r);
    const auto count = r.count(4);
    for (std::size_t i = 0; i < count; ++i) {
        net.spec.sizes.push_back(r.u32());
    }
    try {
        net.spec.validate();
    } catch (const ModelError &e) {
        malformed(e.what());
    }
    for (std::size_t l = 0; l + 1 < count; ++l) {
        const auto in = static_cast<Eigen::Index>(net.spec.sizes[l]);
        const auto out = static_cast<Eigen::Index>(net.spec.sizes[l + 1]);
        Eigen::MatrixXd w;
        Eigen::RowVectorXd b;
        r.block(w, out, in);
        r.block(b, 1, out);
        net.weights.push_back(std::move(w));
        net.biases.push_back(b.transpose());
    }
    return net;
}

void write(Writer &w, const naive_bayes::NBModel &nb) {
    const auto &prior = naive_bayes::prior_of(nb);
    w.u8(static_cast<std::uint8_t>(naive_bayes::family_of(nb)));
    w.u32(naive_bayes::feature_count(nb));
    for (auto c : prior.class_count) {
        w.u64(c);
    }
    for (auto p : prior.log_prior) {
        w.f64(p);
    }
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, naive_bayes::GaussianNB>) {
                w.block(m.mean);
                w.block(m.variance);
            } else if constexpr (std::is_same_v<T, naive_bayes::BernoulliNB>) {
                w.f64(m.binarize_threshold);
                w.f64(m.alpha);
                w.block(m.log_p);
                w.block(m.log_q);
            } else {
                w.f64(m.alpha);
                w.block(m.weight);
            }
        },
        nb);
}

naive_bayes::NBModel read_nb(Reader &r) {
    const auto family = r.u8();
    if (family > 2) {
        malformed("unknown Naive Bayes family " + std::to_string(family));
    }
    const auto d = static_cast<Eigen::Index>(r.count(0));
    naive_bayes::ClassPrior prior;
    for (auto &c : prior.class_count) {
        c = r.u64();
    }
    for (auto &p : prior.log_prior) {
        p = r.f64();
    }
    switch (static_cast<Family>(family)) {
    case Family::kGaussian: {
        naive_bayes::GaussianNB m;
        m.prior = prior;
        r.block(m.mean, 2, d);
        r.block(m.variance, 2, d);
        if ((m.variance.array() <= 0.0).any()) {
            malformed("non-positive Gaussian variance");
        }
        return m;
    }
    case Family::kBernoulli: {
        naive_bayes::BernoulliNB m;
        m.prior = prior;
        m.binarize_threshold = r.f64();
        m.alpha = r.f64();
        r.block(m.log_p, 2, d);
        r.block(m.log_q, 2, d);
        return m;
    }
    case Family::kComplement: {
        naive_bayes::ComplementNB m;
        m.prior = prior;
        m.alpha = r.f64();
        r.block(m.weight, 2, d);
        return m;
    }
    }
    malformed("unreachable family");
}

Bytes payload_of(const Model &model) {
    Writer w;
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, pipeline::NBcodedModel>) {
                w.u64(m.seed);
                write(w, m.normalizer);
                write(w, m.encoder.network);
                write(w, m.nb);
                w.u8(m.cnb_offsets ? 1 : 0);
                if (m.cnb_offsets) {
                    w.u32(static_cast<std::size_t>(m.cnb_offsets->size()));
                    w.block(m.cnb_offsets->transpose());
                }
            } else if constexpr (std::is_same_v<T, pipeline::NaiveBayesModel>) {
                write(w, m.normalizer);
                write(w, m.nb);
            } else if constexpr (std::is_same_v<T, pipeline::MlpModel>) {
                write(w, m.normalizer);
                write(w, m.mlp.network);
            }
        },
        model);
    return w.take();
}

void check_nbcoded(const pipeline::NBcodedModel &m) {
    if (m.encoder.input_size() != m.normalizer.cols()) {
        malformed("encoder input width differs from the normalizer width");
    }
    if (naive_bayes::feature_count(m.nb) != m.encoder.output_size()) {
        malformed("classifier width differs from the encoder output width");
    }
    const bool complement = m.family() == Family::kComplement;
    if (complement != m.cnb_offsets.has_value()) {
        malformed("translation offsets must accompany exactly the Complement family");
    }
    if (m.cnb_offsets &&
        static_cast<std::size_t>(m.cnb_offsets->size()) != m.encoder.output_size()) {
        malformed("translation offsets have the wrong width");
    }
}

} // namespace

std::size_t nb_parameter_count(const naive_bayes::NBModel &nb) {
    const auto d = naive_bayes::feature_count(nb);
    switch (naive_bayes::family_of(nb)) {
    case Family::kGaussian:
        return 2 + 4 * d;
    case Family::kBernoulli:
        return 2 + 2 + 4 * d;
    case Family::kComplement:
        return 2 + 1 + 2 * d;
    }
    return 0;
}

Bytes serialize(const Model &model) {
    const Bytes payload = payload_of(model);
    Writer w;
    for (auto b : kMagic) {
        w.u8(b);
    }
    w.u16(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(model.index()));
    w.u32(payload.size());
    Bytes out = w.take();
    out.insert(out.end(), payload.begin(), payload.end());
    Writer trailer;
    trailer.u32(crc32_of(payload));
    const Bytes crc = trailer.take();
    out.insert(out.end(), crc.begin(), crc.end());
    return out;
}

Model deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw ModelIoError(ErrorKind::kBadMagic, "not an .nbc model file (bad magic)");
    }
    if (bytes.size() < kHeaderBytes) {
        throw ModelIoError(ErrorKind::kTruncated, "model header is truncated");
    }
    Reader header{bytes.subspan(kMagic.size(), kHeaderBytes - kMagic.size())};
    const auto version = header.u16();
    if (version != kFormatVersion) {
        throw ModelIoError(ErrorKind::kUnsupportedVersion,
                           "unsupported model format version " + std::to_string(version));
    }
    const auto kind = header.u8();
    const std::size_t length = header.u32();
    if (bytes.size() - kHeaderBytes < length + kTrailerBytes) {
        throw ModelIoError(ErrorKind::kTruncated, "model file is truncated");
    }
    if (bytes.size() != kHeaderBytes + length + kTrailerBytes) {
        malformed("trailing bytes after checksum");
    }
    const auto payload = bytes.subspan(kHeaderBytes, length);
    Reader trailer{bytes.subspan(kHeaderBytes + length)};
    if (trailer.u32() != crc32_of(payload)) {
        throw ModelIoError(ErrorKind::kChecksumMismatch, "model checksum mismatch");
    }

    Reader r{payload};
    Model model;
    switch (static_cast<ModelKind>(kind)) {
    case ModelKind::kEmpty:
        model = EmptyModel{};
        break;
    case ModelKind::kNBcoded: {
        pipeline::NBcodedModel m;
        m.seed = r.u64();
        m.normalizer = read_normalizer(r);
        m.encoder.network = read_network(r);
        m.nb = read_nb(r);
        if (r.u8() != 0) {
            const auto n = r.count(8);
            Eigen::RowVectorXd offsets;
            r.block(offsets, 1, static_cast<Eigen::Index>(n));
            m.cnb_offsets = offsets.transpose();
        }
        check_nbcoded(m);
        model = std::move(m);
        break;
    }
    case ModelKind::kNaiveBayes: {
        pipeline::NaiveBayesModel m;
        m.normalizer = read_normalizer(r);
        m.nb = read_nb(r);
        if (naive_bayes::feature_count(m.nb) != m.normalizer.cols()) {
            malformed("classifier width differs from the normalizer width");
        }
        model = std::move(m);
        break;
    }
    case ModelKind::kMlp: {
        pipeline::MlpModel m;
        m.normalizer = read_normalizer(r);
        m.mlp.network = read_network(r);
        if (m.mlp.network.input_size() != m.normalizer.cols() || m.mlp.network.output_size() != 1) {
            malformed("MLP widths do not match a binary classifier over the normalizer columns");
        }
        model = std::move(m);
        break;
    }
    default:
        malformed("unknown model kind " + std::to_string(kind));
    }
    if (!r.done()) {
        malformed("unused bytes at the end of the payload");
    }
    return model;
}

void save(const std::string &path, const Model &model) {
    const auto bytes = serialize(model);
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ModelIoError(ErrorKind::kIo, "cannot write model file '" + path + "'");
    }
}

Model load(const std::string &path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw ModelIoError(ErrorKind::kIo, "cannot open model file '" + path + "'");
    }
    const Bytes bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize(bytes);
}

} // namespace nbcoded::model_io
