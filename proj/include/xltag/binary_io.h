#ifndef XLTAG_BINARY_IO_H_
#define XLTAG_BINARY_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xltag {

// Little-endian fixed-width binary encoding used by every model file.
// Strings are a u32 byte length followed by the raw UTF-8 bytes.
class BinaryWriter {
 public:
  void write_magic(std::string_view magic);
  void write_u8(uint8_t value);
  void write_u32(uint32_t value);
  void write_u64(uint64_t value);
  void write_f64(double value);
  void write_string(std::string_view value);
  void write_f64_array(std::span<const double> values);

  const std::vector<uint8_t> &bytes() const { return bytes_; }

  // Appends the FNV-1a 64 checksum of everything written so far.
  void write_checksum();

  // Writes the buffer to |path|; throws DataError on I/O failure.
  void save(const std::string &path) const;

 private:
  std::vector<uint8_t> bytes_;
};

// Bounds-checked reader over a byte buffer. All failures throw FormatError.
class BinaryReader {
 public:
  explicit BinaryReader(std::vector<uint8_t> bytes);
  static BinaryReader from_file(const std::string &path);

  void expect_magic(std::string_view magic);
  uint8_t read_u8();
  uint32_t read_u32();
  uint64_t read_u64();
  double read_f64();
  std::string read_string();
  void read_f64_array(std::span<double> out);

  // Verifies a trailing checksum over all bytes preceding the current offset.
  void verify_checksum();
  void expect_end() const;

 private:
  void need(size_t count) const;

  std::vector<uint8_t> bytes_;
  size_t offset_ = 0;
};

uint64_t fnv1a64(std::span<const uint8_t> bytes);

// Reads a whole file as bytes; throws DataError naming the path on failure.
std::vector<uint8_t> read_file_bytes(const std::string &path);

}  // namespace xltag

#endif  // XLTAG_BINARY_IO_H_
