#include "pconv/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pconv/errors.hpp"
#include "pconv/rng.hpp"

namespace pconv {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

constexpr char kMagic[8] = {'P', 'C', 'O', 'N', 'V', 'C', 'K', 'P'};

enum class Kind : std::uint8_t { tensor = 0, u64 = 1, f64 = 2, text = 3 };

class Writer {
public:
    template <class T>
    void pod(const T& v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void raw(const void* data, std::size_t n) {
        const auto* p = static_cast<const char*>(data);
        bytes_.insert(bytes_.end(), p, p + n);
    }
    std::string& bytes() { return bytes_; }

private:
    std::string bytes_;
};

class Reader {
public:
    Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}
    template <class T>
    T pod() {
        T v;
        raw(&v, sizeof(T));
        return v;
    }
    void raw(void* out, std::size_t n) {
        if (n > end_ - pos_) throw IoError("checkpoint truncated");
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    bool done() const { return pos_ == end_; }

private:
    const std::string& bytes_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

std::uint64_t checksum(std::string_view bytes) { return hash_label(bytes); }

}  // namespace

template <class T>
const T& Archive::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw IoError("checkpoint has no entry '" + key + "'");
    const T* v = std::get_if<T>(&it->second);
    if (!v) throw IoError("checkpoint entry '" + key + "' has an unexpected kind");
    return *v;
}

const Tensor& Archive::tensor(const std::string& key) const { return get<Tensor>(key); }
std::uint64_t Archive::u64(const std::string& key) const { return get<std::uint64_t>(key); }
double Archive::f64(const std::string& key) const { return get<double>(key); }
const std::string& Archive::text(const std::string& key) const { return get<std::string>(key); }

std::vector<std::string> Archive::keys(const std::string& prefix) const {
    std::vector<std::string> out;
    for (auto it = entries_.lower_bound(prefix); it != entries_.end() && it->first.starts_with(prefix); ++it) {
        out.push_back(it->first);
    }
    return out;
}

void Archive::save(const std::filesystem::path& path) const {
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.pod(kFormatVersion);
    w.pod(static_cast<std::uint64_t>(entries_.size()));
    for (const auto& [key, entry] : entries_) {
        w.pod(static_cast<std::uint8_t>(entry.index()));
        w.pod(static_cast<std::uint32_t>(key.size()));
        w.raw(key.data(), key.size());
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Tensor>) {
                    w.pod(static_cast<std::uint32_t>(v.rank()));
                    for (std::size_t e : v.shape()) w.pod(static_cast<std::uint64_t>(e));
                    w.raw(v.raw(), v.size() * sizeof(double));
                } else if constexpr (std::is_same_v<T, std::string>) {
                    w.pod(static_cast<std::uint64_t>(v.size()));
                    w.raw(v.data(), v.size());
                } else {
                    w.pod(v);
                }
            },
            entry);
    }
    const std::uint64_t sum = checksum(w.bytes());
    w.pod(sum);

    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into '" + path.string() + "': " + ec.message());
}

Archive Archive::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < sizeof kMagic + sizeof(std::uint32_t) + 2 * sizeof(std::uint64_t) ||
        std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw IoError("'" + path.string() + "' is not a pconv checkpoint");
    }
    const std::size_t body = bytes.size() - sizeof(std::uint64_t);
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + body, sizeof stored);
    if (stored != checksum(std::string_view(bytes).substr(0, body))) {
        throw IoError("checkpoint '" + path.string() + "' is corrupt (checksum mismatch)");
    }

    Reader r(bytes, body);
    char magic[sizeof kMagic];
    r.raw(magic, sizeof magic);
    const auto version = r.pod<std::uint32_t>();
    if (version != kFormatVersion) {
        throw IoError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kFormatVersion) + ")");
    }
    Archive a;
    const auto count = r.pod<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto kind = static_cast<Kind>(r.pod<std::uint8_t>());
        std::string key(r.pod<std::uint32_t>(), '\0');
        r.raw(key.data(), key.size());
        switch (kind) {
            case Kind::tensor: {
                Shape shape(r.pod<std::uint32_t>());
                for (auto& e : shape) e = static_cast<std::size_t>(r.pod<std::uint64_t>());
                std::vector<double> data(numel(shape));
                r.raw(data.data(), data.size() * sizeof(double));
                a.entries_[key] = Tensor(std::move(shape), std::move(data));
                break;
            }
            case Kind::u64: a.entries_[key] = r.pod<std::uint64_t>(); break;
            case Kind::f64: a.entries_[key] = r.pod<double>(); break;
            case Kind::text: {
                std::string s(r.pod<std::uint64_t>(), '\0');
                r.raw(s.data(), s.size());
                a.entries_[key] = std::move(s);
                break;
            }
            default: throw IoError("checkpoint entry '" + key + "' has unknown kind");
        }
    }
    if (!r.done()) throw IoError("checkpoint '" + path.string() + "' has trailing bytes");
    return a;
}

}  // namespace pconv
