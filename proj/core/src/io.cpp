#include "wavemask/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "wavemask/error.hpp"

namespace wavemask::io {
namespace {

constexpr std::uint32_t kMaxRank = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in[at + k]) << (8 * k);
  return v;
}

// Tokenizer for the ASCII part of a PNM header.
class PnmHeader {
 public:
  PnmHeader(const std::vector<std::uint8_t>& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1ULL << 32)) throw FormatError(source_, static_cast<std::int64_t>(start), std::string(what) + " overflows");
      ++pos_;
    }
    if (pos_ == start) throw FormatError(source_, static_cast<std::int64_t>(start), std::string("expected ") + what);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError(source_, static_cast<std::int64_t>(pos_), "expected whitespace after maxval");
    }
    ++pos_;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string source_;
  std::size_t pos_ = 2;
};

std::uint8_t quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

std::vector<std::uint8_t> encode_lwt(const Tensor& t) {
  if (t.empty()) throw InvalidArgument("encode_lwt: empty tensor");
  if (t.rank() > kMaxRank) throw InvalidArgument("encode_lwt: rank exceeds " + std::to_string(kMaxRank));
  std::vector<std::uint8_t> out = {'L', 'W', 'T', '1'};
  out.reserve(8 + 4 * t.rank() + 4 * t.size());
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("encode_lwt: dimension exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Tensor decode_lwt(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  auto fail = [&](std::size_t at, const std::string& what) -> FormatError {
    return FormatError(source, static_cast<std::int64_t>(at), what);
  };
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, "LWT1")) throw fail(0, "bad magic, expected LWT1");
  if (bytes.size() < 8) throw fail(bytes.size(), "truncated header: missing rank");
  const std::uint32_t rank = get_u32(bytes, 4);
  if (rank == 0 || rank > kMaxRank) throw fail(4, "unsupported rank " + std::to_string(rank));
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(rank);
  if (bytes.size() < header) throw fail(bytes.size(), "truncated header: missing dims");

  Shape shape(rank);
  std::uint64_t count = 1;
  for (std::uint32_t k = 0; k < rank; ++k) {
    const std::size_t at = 8 + 4 * k;
    shape[k] = get_u32(bytes, at);
    if (shape[k] == 0) throw fail(at, "zero dimension");
    // Payload bytes must stay representable: count * 4 < 2^62.
    if (count > (std::uint64_t{1} << 60) / shape[k]) throw fail(at, "dimension overflow");
    count *= shape[k];
  }
  const std::uint64_t need = header + 4 * count;
  if (bytes.size() < need) {
    throw fail(bytes.size(), "truncated payload: expected " + std::to_string(need) + " bytes, got " +
                                 std::to_string(bytes.size()));
  }
  if (bytes.size() > need) throw fail(need, "trailing bytes after payload");

  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = header + 4 * i;
    const float f = std::bit_cast<float>(get_u32(bytes, at));
    if (!std::isfinite(f)) throw fail(at, "non-finite value");
    data[i] = static_cast<double>(f);
  }
  return Tensor(std::move(shape), std::move(data));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), -1, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path.string(), -1, "cannot open file for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path.string(), -1, "write failed");
}

void write_lwt(const std::filesystem::path& path, const Tensor& t) { write_file(path, encode_lwt(t)); }

Tensor read_lwt(const std::filesystem::path& path) { return decode_lwt(read_file(path), path.string()); }

Tensor decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError(source, 0, "bad magic, expected P5 or P6");
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  PnmHeader header(bytes, source);
  const std::size_t width_at = header.pos();
  const std::uint64_t width = header.number("width");
  const std::uint64_t height = header.number("height");
  const std::size_t maxval_at = header.pos();
  const std::uint64_t maxval = header.number("maxval");
  if (width == 0 || height == 0) throw FormatError(source, static_cast<std::int64_t>(width_at), "zero dimension");
  if (maxval == 0 || maxval > 255) {
    throw FormatError(source, static_cast<std::int64_t>(maxval_at), "only 8-bit maxval (1..255) is supported");
  }
  if (width * height > (std::uint64_t{1} << 34)) {
    throw FormatError(source, static_cast<std::int64_t>(width_at), "dimension overflow");
  }
  header.single_space();
  const std::size_t start = header.pos();
  const std::uint64_t count = width * height * channels;
  if (bytes.size() - start < count) {
    throw FormatError(source, static_cast<std::int64_t>(bytes.size()),
                      "truncated payload: expected " + std::to_string(count) + " pixel bytes");
  }
  Tensor out({channels, static_cast<std::size_t>(height), static_cast<std::size_t>(width)});
  const double scale = static_cast<double>(maxval);
  const std::size_t plane = height * width;
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      // Interleaved RGB on disk, planar in memory.
      out[c * plane + p] = static_cast<double>(bytes[start + p * channels + c]) / scale;
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_pnm(const Tensor& t) {
  const auto [c, h, w] = as_chw(t, "encode_pnm");
  if (c != 1 && c != 3) throw InvalidArgument("encode_pnm: need 1 or 3 channels, got " + std::to_string(c));
  const std::string header = std::string(c == 3 ? "P6" : "P5") + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + t.size());
  const std::size_t plane = h * w;
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) out.push_back(quantize(t[ch * plane + p]));
  }
  return out;
}

Tensor read_pnm(const std::filesystem::path& path) { return decode_pnm(read_file(path), path.string()); }

void write_pnm(const std::filesystem::path& path, const Tensor& t) { write_file(path, encode_pnm(t)); }

Tensor read_any(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "LWT1")) return decode_lwt(bytes, path.string());
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes, path.string());
  throw FormatError(path.string(), 0, "unrecognized file format (expected LWT1, P5 or P6)");
}

}  // namespace wavemask::io
