#include "xltag/binary_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "xltag/errors.h"

namespace xltag {

namespace {

template <typename T>
void append_le(std::vector<uint8_t> &out, T value) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<uint8_t>(value >> (8 * i)));
  }
}

}  // namespace

void BinaryWriter::write_magic(std::string_view magic) {
  bytes_.insert(bytes_.end(), magic.begin(), magic.end());
}

void BinaryWriter::write_u8(uint8_t value) { bytes_.push_back(value); }

void BinaryWriter::write_u32(uint32_t value) { append_le(bytes_, value); }

void BinaryWriter::write_u64(uint64_t value) { append_le(bytes_, value); }

void BinaryWriter::write_f64(double value) {
  append_le(bytes_, std::bit_cast<uint64_t>(value));
}

void BinaryWriter::write_string(std::string_view value) {
  write_u32(static_cast<uint32_t>(value.size()));
  bytes_.insert(bytes_.end(), value.begin(), value.end());
}

void BinaryWriter::write_f64_array(std::span<const double> values) {
  bytes_.reserve(bytes_.size() + 8 * values.size());
  for (double v : values) write_f64(v);
}

void BinaryWriter::write_checksum() { write_u64(fnv1a64(bytes_)); }

void BinaryWriter::save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char *>(bytes_.data()),
            static_cast<std::streamsize>(bytes_.size()));
  if (!out) throw DataError("write failed: " + path);
}

BinaryReader::BinaryReader(std::vector<uint8_t> bytes)
    : bytes_(std::move(bytes)) {}

BinaryReader BinaryReader::from_file(const std::string &path) {
  return BinaryReader(read_file_bytes(path));
}

void BinaryReader::need(size_t count) const {
  if (bytes_.size() - offset_ < count) {
    throw FormatError("truncated binary file at offset " +
                      std::to_string(offset_));
  }
}

void BinaryReader::expect_magic(std::string_view magic) {
  need(magic.size());
  if (std::memcmp(bytes_.data() + offset_, magic.data(), magic.size()) != 0) {
    throw FormatError("bad magic, expected " + std::string(magic));
  }
  offset_ += magic.size();
}

uint8_t BinaryReader::read_u8() {
  need(1);
  return bytes_[offset_++];
}

uint32_t BinaryReader::read_u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t{bytes_[offset_ + i]} << (8 * i);
  offset_ += 4;
  return v;
}

uint64_t BinaryReader::read_u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t{bytes_[offset_ + i]} << (8 * i);
  offset_ += 8;
  return v;
}

double BinaryReader::read_f64() { return std::bit_cast<double>(read_u64()); }

std::string BinaryReader::read_string() {
  uint32_t size = read_u32();
  need(size);
  std::string s(reinterpret_cast<const char *>(bytes_.data() + offset_), size);
  offset_ += size;
  return s;
}

void BinaryReader::read_f64_array(std::span<double> out) {
  need(8 * out.size());
  for (double &v : out) v = read_f64();
}

void BinaryReader::verify_checksum() {
  uint64_t expected = fnv1a64(std::span(bytes_.data(), offset_));
  if (read_u64() != expected) throw FormatError("checksum mismatch");
}

void BinaryReader::expect_end() const {
  if (offset_ != bytes_.size()) throw FormatError("trailing bytes in file");
}

uint64_t fnv1a64(std::span<const uint8_t> bytes) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::vector<uint8_t> read_file_bytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

}  // namespace xltag
