#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cleannet/dataset.hpp"
#include "cleannet/error.hpp"
#include "cleannet/tensor.hpp"

namespace cleannet {

// ---------------------------------------------------------------------------
// Feature file: magic "FEAT", u32 version, u64 n, u32 d (little endian),
// then n*d IEEE-754 32-bit floats, row major.
// ---------------------------------------------------------------------------

constexpr std::uint32_t kFeatureFormatVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint32_t get_u32(const std::string& buf, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[off + i]);
    return v;
}
inline std::uint64_t get_u64(const std::string& buf, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[off + i]);
    return v;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + path);
}

/// Exact-round-trip rendering of a double (hex float).
inline std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
    const char* p = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p || *end != '\0') throw FormatError("bad numeric value '" + s + "' in " + context);
    return v;
}

}  // namespace detail

inline void save_features(const std::string& path, const Tensor& features) {
    if (features.rank() != 2) throw DimensionError("save_features: rank-2 tensor required");
    std::string out;
    out.reserve(20 + features.numel() * 4);
    out += "FEAT";
    detail::put_u32(out, kFeatureFormatVersion);
    detail::put_u64(out, features.rows());
    detail::put_u32(out, static_cast<std::uint32_t>(features.cols()));
    for (double v : features.data) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::put_u32(out, bits);
    }
    detail::write_file(path, out);
}

/// Loads a feature matrix; 32-bit payload values widen to 64-bit exactly.
inline Tensor load_features(const std::string& path) {
    const std::string buf = detail::read_file(path);
    if (buf.size() < 4 || buf.compare(0, 4, "FEAT") != 0)
        throw FormatError("feature file " + path + ": bad magic at byte offset 0");
    if (buf.size() < 8) throw FormatError("feature file " + path + ": truncated header at byte offset 4");
    const std::uint32_t version = detail::get_u32(buf, 4);
    if (version != kFeatureFormatVersion)
        throw FormatError("feature file " + path + ": unsupported version " + std::to_string(version) +
                          " at byte offset 4");
    if (buf.size() < 20) throw FormatError("feature file " + path + ": truncated header at byte offset 8");
    const std::uint64_t n = detail::get_u64(buf, 8);
    const std::uint32_t d = detail::get_u32(buf, 16);
    const std::size_t expect = 20 + static_cast<std::size_t>(n) * d * 4;
    if (buf.size() < expect)
        throw FormatError("feature file " + path + ": payload truncated at byte offset " +
                          std::to_string(buf.size()) + " (expected " + std::to_string(expect) + " bytes)");
    if (buf.size() > expect)
        throw FormatError("feature file " + path + ": trailing bytes at byte offset " + std::to_string(expect));
    Tensor t = Tensor::zeros({static_cast<std::size_t>(n), d});
    for (std::size_t i = 0; i < t.numel(); ++i) {
        const std::uint32_t bits = detail::get_u32(buf, 20 + i * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        t.at(i) = static_cast<double>(f);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Label file: UTF-8 TSV, one record per sample:
//   sample_index <TAB> noisy_class <TAB> verification_label
// Classes are 1-based; lines starting with '#' are comments. Every sample
// index in [0, n) must appear exactly once.
// ---------------------------------------------------------------------------

inline void save_labels(const std::string& path, const std::vector<int>& noisy,
                        const std::vector<int>& verification) {
    if (noisy.size() != verification.size()) throw DimensionError("save_labels: length mismatch");
    std::ostringstream out;
    for (std::size_t i = 0; i < noisy.size(); ++i)
        out << i << '\t' << noisy[i] << '\t' << verification[i] << '\n';
    detail::write_file(path, out.str());
}

inline std::pair<std::vector<int>, std::vector<int>> load_labels(const std::string& path, std::size_t n,
                                                                 int class_count) {
    const std::string buf = detail::read_file(path);
    std::vector<int> noisy(n, 0), verification(n, 0);
    std::vector<bool> seen(n, false);
    std::istringstream in(buf);
    std::string line;
    std::size_t lineno = 0, records = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long idx, y, l;
        char tab1 = 0, tab2 = 0;
        if (!(ls >> idx) || !ls.get(tab1) || tab1 != '\t' || !(ls >> y) || !ls.get(tab2) || tab2 != '\t' ||
            !(ls >> l))
            throw ValidationError("label file " + path + " line " + std::to_string(lineno) +
                                  ": expected sample<TAB>class<TAB>verification");
        std::string rest;
        if (ls >> rest)
            throw ValidationError("label file " + path + " line " + std::to_string(lineno) + ": trailing field");
        if (idx < 0 || static_cast<std::size_t>(idx) >= n)
            throw ValidationError("label file " + path + " line " + std::to_string(lineno) +
                                  ": sample index out of range");
        if (seen[static_cast<std::size_t>(idx)])
            throw ValidationError("label file " + path + " line " + std::to_string(lineno) +
                                  ": duplicate sample index");
        if (y < 1 || y > class_count)
            throw ValidationError("label file " + path + " line " + std::to_string(lineno) +
                                  ": class id " + std::to_string(y) + " outside [1, " +
                                  std::to_string(class_count) + "]");
        if (l != -1 && l != 0 && l != 1)
            throw ValidationError("label file " + path + " line " + std::to_string(lineno) +
                                  ": verification label must be -1, 0 or 1");
        seen[static_cast<std::size_t>(idx)] = true;
        noisy[static_cast<std::size_t>(idx)] = static_cast<int>(y);
        verification[static_cast<std::size_t>(idx)] = static_cast<int>(l);
        ++records;
    }
    if (records != n)
        throw ValidationError("label file " + path + ": " + std::to_string(records) + " records, expected " +
                              std::to_string(n));
    return {std::move(noisy), std::move(verification)};
}

/// Class count inferred from the largest class id in a label file; used when
/// the caller does not know L upfront.
inline int scan_class_count(const std::string& path) {
    const std::string buf = detail::read_file(path);
    std::istringstream in(buf);
    std::string line;
    long long max_y = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long idx = 0, y = 0;
        if (ls >> idx >> y) max_y = std::max(max_y, y);
    }
    if (max_y < 1) throw ValidationError("label file " + path + ": no class ids found");
    return static_cast<int>(max_y);
}

// ---------------------------------------------------------------------------
// Checkpoint: a text manifest of named tensors plus key/value metadata.
// Doubles are written as hex floats so load(save(m)) reproduces every value
// bit-exactly and save(load(save(m))) is byte-identical.
// ---------------------------------------------------------------------------

constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    std::string kind;  // "cleannet", "classifier", "refsets", ...
    std::vector<std::pair<std::string, std::string>> meta;       // insertion-ordered
    std::vector<std::pair<std::string, Tensor>> tensors;         // insertion-ordered

    void set_meta(const std::string& key, const std::string& value) { meta.emplace_back(key, value); }
    void set_meta_double(const std::string& key, double value) { meta.emplace_back(key, detail::hex_double(value)); }
    void set_meta_int(const std::string& key, long long value) { meta.emplace_back(key, std::to_string(value)); }

    bool has_meta(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return true;
        return false;
    }
    const std::string& get_meta(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        throw FormatError("checkpoint: missing metadata key '" + key + "'");
    }
    double get_meta_double(const std::string& key) const {
        return detail::parse_double(get_meta(key), "metadata key '" + key + "'");
    }
    long long get_meta_int(const std::string& key) const { return std::stoll(get_meta(key)); }

    void add_tensor(const std::string& name, Tensor t) { tensors.emplace_back(name, std::move(t)); }

    const Tensor& get_tensor(const std::string& name) const {
        for (const auto& [k, v] : tensors)
            if (k == name) return v;
        throw FormatError("checkpoint: missing tensor '" + name + "'");
    }
};

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ostringstream out;
    out << "CLEANNET-CKPT " << kCheckpointFormatVersion << '\n';
    out << "kind " << ckpt.kind << '\n';
    for (const auto& [k, v] : ckpt.meta) out << "meta " << k << ' ' << v << '\n';
    for (const auto& [name, t] : ckpt.tensors) {
        out << "tensor " << name << ' ' << t.rank();
        for (std::size_t s : t.shape) out << ' ' << s;
        out << '\n';
        // one line per leading-dimension slice, one line total for rank <= 1
        const std::size_t rows = t.rank() >= 2 ? t.shape[0] : 1;
        const std::size_t stride = rows ? t.numel() / std::max<std::size_t>(rows, 1) : 0;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < stride; ++c)
                out << (c ? " " : "") << detail::hex_double(t.at(r * stride + c));
            out << '\n';
        }
    }
    out << "end\n";
    detail::write_file(path, out.str());
}

inline Checkpoint load_checkpoint(const std::string& path) {
    const std::string buf = detail::read_file(path);
    std::istringstream in(buf);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("checkpoint " + path + ": empty file");
    {
        std::istringstream hs(line);
        std::string magic;
        int version = -1;
        if (!(hs >> magic >> version) || magic != "CLEANNET-CKPT")
            throw FormatError("checkpoint " + path + ": bad header line");
        if (version != kCheckpointFormatVersion)
            throw FormatError("checkpoint " + path + ": incompatible format version " + std::to_string(version) +
                              " (expected " + std::to_string(kCheckpointFormatVersion) + ")");
    }
    Checkpoint ckpt;
    bool saw_end = false;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "kind") {
            ls >> ckpt.kind;
        } else if (tag == "meta") {
            std::string key, value;
            if (!(ls >> key)) throw FormatError("checkpoint " + path + " line " + std::to_string(lineno) + ": bad meta");
            std::getline(ls, value);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            ckpt.meta.emplace_back(key, value);
        } else if (tag == "tensor") {
            std::string name;
            std::size_t rank = 0;
            if (!(ls >> name >> rank))
                throw FormatError("checkpoint " + path + " line " + std::to_string(lineno) + ": bad tensor header");
            std::vector<std::size_t> shape(rank);
            for (auto& s : shape)
                if (!(ls >> s))
                    throw FormatError("checkpoint " + path + " line " + std::to_string(lineno) + ": bad tensor shape");
            Tensor t = Tensor::zeros(shape);
            const std::size_t rows = rank >= 2 ? shape[0] : 1;
            const std::size_t stride = rows ? t.numel() / std::max<std::size_t>(rows, 1) : 0;
            std::size_t written = 0;
            for (std::size_t r = 0; r < rows; ++r) {
                if (!std::getline(in, line))
                    throw FormatError("checkpoint " + path + ": tensor '" + name + "' truncated");
                ++lineno;
                std::istringstream vs(line);
                std::string tok;
                std::size_t c = 0;
                while (vs >> tok) {
                    if (c >= stride)
                        throw FormatError("checkpoint " + path + " line " + std::to_string(lineno) +
                                          ": too many values for tensor '" + name + "'");
                    t.at(r * stride + c) = detail::parse_double(tok, "tensor '" + name + "'");
                    ++c;
                    ++written;
                }
                if (c != stride)
                    throw FormatError("checkpoint " + path + " line " + std::to_string(lineno) +
                                      ": tensor '" + name + "' row has " + std::to_string(c) +
                                      " values, expected " + std::to_string(stride));
            }
            if (written != t.numel())
                throw FormatError("checkpoint " + path + ": tensor '" + name + "' has " + std::to_string(written) +
                                  " values, expected " + std::to_string(t.numel()));
            ckpt.tensors.emplace_back(name, std::move(t));
        } else if (tag == "end") {
            saw_end = true;
            break;
        } else {
            throw FormatError("checkpoint " + path + " line " + std::to_string(lineno) + ": unknown tag '" + tag +
                              "'");
        }
    }
    if (!saw_end) throw FormatError("checkpoint " + path + ": missing end marker");
    return ckpt;
}

// ---------------------------------------------------------------------------
// Reference sets ride the checkpoint tensor table, one named tensor per class.
// ---------------------------------------------------------------------------

inline Checkpoint checkpoint_from_reference_sets(const ReferenceSets& refs) {
    Checkpoint ckpt;
    ckpt.kind = "refsets";
    ckpt.set_meta_int("classes", static_cast<long long>(refs.size()));
    for (const auto& [cid, rs] : refs) {
        char name[32];
        std::snprintf(name, sizeof name, "class_%04d", cid);
        ckpt.add_tensor(name, rs.vectors);
    }
    return ckpt;
}

inline ReferenceSets reference_sets_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != "refsets")
        throw FormatError("checkpoint kind '" + ckpt.kind + "' is not a reference-set checkpoint");
    ReferenceSets refs;
    for (const auto& [name, t] : ckpt.tensors) {
        if (name.rfind("class_", 0) != 0) throw FormatError("refsets checkpoint: unexpected tensor '" + name + "'");
        const int cid = std::stoi(name.substr(6));
        refs[cid] = ReferenceSet{cid, t};
    }
    return refs;
}

}  // namespace cleannet
