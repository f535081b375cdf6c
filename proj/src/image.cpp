#include "cmc/image.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cmc/error.hpp"

namespace cmc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OverlappingLeaves: return "OverlappingLeaves";
    case ErrorCode::LeavesDoNotCoverImage: return "LeavesDoNotCoverImage";
    case ErrorCode::SubsetNotForest: return "SubsetNotForest";
    case ErrorCode::AdjacencyBetweenOverlapping: return "AdjacencyBetweenOverlapping";
    case ErrorCode::AdjacencyNotTouching: return "AdjacencyNotTouching";
    case ErrorCode::InvalidCandidate: return "InvalidCandidate";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::NoSeeds: return "NoSeeds";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::NotAnEdge: return "NotAnEdge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InfeasibleSolution: return "InfeasibleSolution";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

void check_unit_range(const RealImage& image) {
  for (double v : image.data()) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::InvalidBoundary, "value outside [0,1]: " + std::to_string(v));
    }
  }
}

namespace {

struct PgmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
};

// Skips whitespace and '#' comments between header tokens.
int read_header_int(std::istream& in, const std::string& path) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = 0;
  if (!(in >> value)) throw Error(ErrorCode::Parse, "malformed PGM header in " + path);
  return value;
}

std::vector<std::uint32_t> read_pgm_samples(const std::string& path, PgmHeader& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5") throw Error(ErrorCode::Parse, "not a binary PGM (P5): " + path);
  header.width = read_header_int(in, path);
  header.height = read_header_int(in, path);
  header.maxval = read_header_int(in, path);
  if (header.width <= 0 || header.height <= 0 || header.maxval <= 0 || header.maxval > 65535) {
    throw Error(ErrorCode::Parse, "invalid PGM dimensions or maxval in " + path);
  }
  in.get();  // single whitespace before raster

  const std::size_t n = static_cast<std::size_t>(header.width) * header.height;
  const int bytes = header.maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(n * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error(ErrorCode::Parse, "truncated PGM raster in " + path);
  }
  std::vector<std::uint32_t> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = bytes == 1 ? raw[i] : (std::uint32_t{raw[2 * i]} << 8) | raw[2 * i + 1];
  }
  return samples;
}

void write_pgm_samples(const std::string& path, int width, int height,
                       const std::vector<std::uint32_t>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "P5\n" << width << " " << height << "\n65535\n";
  std::vector<unsigned char> raw(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    raw[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

}  // namespace

LabelImage read_label_pgm(const std::string& path) {
  PgmHeader header;
  auto samples = read_pgm_samples(path, header);
  LabelImage image(header.width, header.height);
  image.data() = std::move(samples);
  return image;
}

RealImage read_real_pgm(const std::string& path) {
  PgmHeader header;
  auto samples = read_pgm_samples(path, header);
  RealImage image(header.width, header.height);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    image.data()[i] = static_cast<double>(samples[i]) / header.maxval;
  }
  return image;
}

void write_label_pgm(const std::string& path, const LabelImage& image) {
  for (auto v : image.data()) {
    if (v > 65535) throw Error(ErrorCode::InvalidArgument, "label exceeds 16 bits: " + std::to_string(v));
  }
  write_pgm_samples(path, image.width(), image.height(), image.data());
}

void write_real_pgm(const std::string& path, const RealImage& image) {
  check_unit_range(image);
  std::vector<std::uint32_t> samples(image.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<std::uint32_t>(std::lround(image.data()[i] * 65535.0));
  }
  write_pgm_samples(path, image.width(), image.height(), samples);
}

}  // namespace cmc
