#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wavemask/tensor.hpp"

namespace wavemask::io {

// LWT1 tensor file:
//   'L' 'W' 'T' '1' | u32 rank | rank x u32 dims | float32 payload
// All integers and floats little-endian, payload row-major. Values are stored
// as float32 and widened to double on read.
std::vector<std::uint8_t> encode_lwt(const Tensor& t);
Tensor decode_lwt(const std::vector<std::uint8_t>& bytes, const std::string& source = "<memory>");

void write_lwt(const std::filesystem::path& path, const Tensor& t);
Tensor read_lwt(const std::filesystem::path& path);

// Binary 8-bit PNM. PGM (P5) yields 1 x H x W, PPM (P6) yields 3 x H x W.
// Pixels map to [0, 1] as v / maxval; writing clamps to [0, 1] and rounds
// v * 255 to the nearest integer.
Tensor decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& source = "<memory>");
std::vector<std::uint8_t> encode_pnm(const Tensor& t);

Tensor read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Tensor& t);

/// Reads an LWT1, PGM or PPM file, dispatching on the magic bytes.
Tensor read_any(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace wavemask::io
