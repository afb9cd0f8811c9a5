#include "maha/vectorstore.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "maha/errors.hpp"
#include "maha/text.hpp"

namespace maha {

VectorIndex VectorIndex::build(std::vector<IndexedChunk> entries, std::string snapshot_id,
                               std::string provider_id) {
    VectorIndex index;
    index.snapshot_id_ = std::move(snapshot_id);
    index.provider_id_ = std::move(provider_id);
    if (entries.empty()) return index;

    index.dim_ = entries.front().embedding.dim();
    std::unordered_set<std::string> seen;
    index.data_.reserve(entries.size() * static_cast<std::size_t>(index.dim_));
    for (auto& e : entries) {
        if (e.embedding.dim() != index.dim_) {
            throw invalid_argument_error("build_index: dimension mismatch for " + e.chunk_id +
                                         " (" + std::to_string(e.embedding.dim()) + " vs " +
                                         std::to_string(index.dim_) + ")");
        }
        if (!seen.insert(e.chunk_id).second) {
            throw invalid_argument_error("build_index: duplicate chunk_id " + e.chunk_id);
        }
        index.ids_.push_back(std::move(e.chunk_id));
        index.modalities_.push_back(e.modality);
        index.data_.insert(index.data_.end(), e.embedding.values.begin(),
                           e.embedding.values.end());
    }
    return index;
}

std::vector<SearchHit> VectorIndex::search(const Embedding& query, int k,
                                           const std::optional<std::set<Modality>>& modality_filter) const {
    if (k <= 0) throw invalid_argument_error("search: k must be positive");
    if (size() == 0) return {};
    if (query.dim() != dim_) {
        throw invalid_argument_error("search: query dim " + std::to_string(query.dim()) +
                                     " != index dim " + std::to_string(dim_));
    }
    std::vector<SearchHit> hits;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (modality_filter && !modality_filter->count(modalities_[i])) continue;
        const float* row = vector_at(i);
        double dot = 0.0;
        for (int d = 0; d < dim_; ++d) {
            dot += static_cast<double>(row[d]) * static_cast<double>(query.values[static_cast<std::size_t>(d)]);
        }
        hits.push_back({ids_[i], dot, 0});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (hits.size() > static_cast<std::size_t>(k)) hits.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i + 1);
    return hits;
}

namespace {

constexpr char kMagic[8] = {'M', 'A', 'H', 'A', 'V', 'I', 'D', 'X'};
constexpr std::uint32_t kIndexVersion = 1;

void put_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& buf, float v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    put_u32(buf, bits);
}

void put_str16(std::string& buf, const std::string& s) {
    if (s.size() > 0xFFFF) throw invalid_argument_error("string too long for index header");
    put_u16(buf, static_cast<std::uint16_t>(s.size()));
    buf += s;
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw format_error("index file truncated");
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint8_t>(buf[pos]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
        }
        pos += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str16() {
        std::size_t n = u16();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace

void VectorIndex::persist(const std::filesystem::path& path) const {
    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    put_u32(buf, kIndexVersion);
    put_u32(buf, static_cast<std::uint32_t>(dim_));
    put_u64(buf, ids_.size());
    put_str16(buf, snapshot_id_);
    put_str16(buf, provider_id_);
    for (float v : data_) put_f32(buf, v);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        put_str16(buf, ids_[i]);
        buf.push_back(static_cast<char>(modalities_[i]));
    }
    put_u64(buf, fnv1a64(buf));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw io_error("write failed: " + path.string());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < sizeof(kMagic) + 8) throw format_error("index file truncated");
    const std::string payload = buf.substr(0, buf.size() - 8);
    Reader tail{buf, buf.size() - 8};
    if (tail.u64() != fnv1a64(payload)) {
        throw format_error("index checksum mismatch: " + path.string());
    }

    Reader r{payload};
    r.need(sizeof(kMagic));
    if (std::memcmp(payload.data(), kMagic, sizeof(kMagic)) != 0) {
        throw format_error("not an index file: " + path.string());
    }
    r.pos = sizeof(kMagic);
    const std::uint32_t version = r.u32();
    if (version != kIndexVersion) {
        throw format_error("unsupported index version " + std::to_string(version));
    }

    VectorIndex index;
    index.dim_ = static_cast<int>(r.u32());
    const std::uint64_t count = r.u64();
    index.snapshot_id_ = r.str16();
    index.provider_id_ = r.str16();
    index.data_.reserve(count * static_cast<std::size_t>(index.dim_));
    for (std::uint64_t i = 0; i < count * static_cast<std::uint64_t>(index.dim_); ++i) {
        index.data_.push_back(r.f32());
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        index.ids_.push_back(r.str16());
        r.need(1);
        index.modalities_.push_back(static_cast<Modality>(r.buf[r.pos]));
        ++r.pos;
    }
    if (r.pos != payload.size()) throw format_error("index file has trailing bytes");
    return index;
}

} // namespace maha
