#pragma once

// PFM read/write (little-endian, rows stored bottom to top) and 8/16-bit
// PGM/PPM ingestion mapped to [0, 1].

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "affscale/error.hpp"
#include "affscale/image.hpp"

namespace affscale::io {

namespace detail {

inline std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  if (tok.empty()) throw Error(ErrorKind::Format, "unexpected end of header");
  return tok;
}

inline int parse_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw Error(ErrorKind::Format, "bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Format, "bad integer '" + s + "'");
  }
}

inline std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + p.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + p.string() + "' for writing");
  return out;
}

}  // namespace detail

/// Writes one (Pf) or three (PF) planes.
inline void write_pfm(const std::filesystem::path& path, const std::vector<RealImage>& planes) {
  if (planes.size() != 1 && planes.size() != 3) {
    throw Error(ErrorKind::InvalidArgument, "PFM holds one or three planes");
  }
  for (const auto& p : planes)
    if (!p.same_shape(planes[0])) throw Error(ErrorKind::DimensionMismatch, "PFM planes differ in size");
  const int W = planes[0].width(), H = planes[0].height();
  auto out = detail::open_out(path);
  out << (planes.size() == 1 ? "Pf" : "PF") << '\n' << W << ' ' << H << '\n' << "-1.0\n";
  std::vector<char> row(static_cast<std::size_t>(W) * planes.size() * 4);
  for (int r = H - 1; r >= 0; --r) {
    std::size_t k = 0;
    for (int c = 0; c < W; ++c)
      for (const auto& p : planes) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(p(c, r)));
        if constexpr (std::endian::native == std::endian::big) bits = detail::byteswap32(bits);
        std::memcpy(row.data() + k, &bits, 4);
        k += 4;
      }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

inline void write_pfm(const std::filesystem::path& path, const RealImage& image) {
  write_pfm(path, std::vector<RealImage>{image});
}

inline std::vector<RealImage> read_pfm(std::istream& in) {
  const std::string magic = detail::next_token(in);
  std::size_t channels;
  if (magic == "Pf") channels = 1;
  else if (magic == "PF") channels = 3;
  else throw Error(ErrorKind::Format, "not a PFM file");
  const int W = detail::parse_int(detail::next_token(in));
  const int H = detail::parse_int(detail::next_token(in));
  double scale;
  try {
    scale = std::stod(detail::next_token(in));
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Format, "bad PFM scale");
  }
  if (W <= 0 || H <= 0 || scale == 0.0) throw Error(ErrorKind::Format, "bad PFM header");
  const bool little = scale < 0.0;
  std::vector<RealImage> planes(channels, RealImage(W, H));
  std::vector<char> row(static_cast<std::size_t>(W) * channels * 4);
  for (int r = H - 1; r >= 0; --r) {
    if (!in.read(row.data(), static_cast<std::streamsize>(row.size()))) {
      throw Error(ErrorKind::Format, "truncated PFM data");
    }
    std::size_t k = 0;
    for (int c = 0; c < W; ++c)
      for (std::size_t ch = 0; ch < channels; ++ch) {
        std::uint32_t bits;
        std::memcpy(&bits, row.data() + k, 4);
        k += 4;
        if (little != (std::endian::native == std::endian::little)) bits = detail::byteswap32(bits);
        planes[ch](c, r) = std::bit_cast<float>(bits);
      }
  }
  return planes;
}

/// Binary PGM (P5) or PPM (P6), maxval up to 65535, scaled to [0, 1].
inline std::vector<RealImage> read_pnm(std::istream& in) {
  const std::string magic = detail::next_token(in);
  std::size_t channels;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw Error(ErrorKind::Format, "only binary PGM/PPM are supported");
  const int W = detail::parse_int(detail::next_token(in));
  const int H = detail::parse_int(detail::next_token(in));
  const int maxval = detail::parse_int(detail::next_token(in));
  if (W <= 0 || H <= 0 || maxval <= 0 || maxval > 65535) throw Error(ErrorKind::Format, "bad PNM header");
  const std::size_t bps = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<std::size_t>(W) * H * channels * bps);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw Error(ErrorKind::Format, "truncated PNM data");
  }
  std::vector<RealImage> planes(channels, RealImage(W, H));
  std::size_t k = 0;
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c)
      for (std::size_t ch = 0; ch < channels; ++ch) {
        unsigned v = buf[k++];
        if (bps == 2) v = (v << 8) | buf[k++];
        planes[ch](c, r) = static_cast<double>(v) / maxval;
      }
  return planes;
}

/// Dispatches on the magic number.
inline std::vector<RealImage> read_image(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  char magic[2] = {0, 0};
  if (!in.read(magic, 2)) throw Error(ErrorKind::Format, "'" + path.string() + "' is empty");
  in.seekg(0);
  if (magic[0] == 'P' && (magic[1] == 'f' || magic[1] == 'F')) return read_pfm(in);
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return read_pnm(in);
  throw Error(ErrorKind::Format, "'" + path.string() + "' is not PFM, PGM or PPM");
}

inline void write_pgm8(const std::filesystem::path& path, const RealImage& img) {
  auto out = detail::open_out(path);
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (double v : img.data()) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace affscale::io
