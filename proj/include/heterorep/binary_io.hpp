#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "heterorep/error.hpp"

namespace heterorep::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written with native little-endian stores");

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    raw(&value, sizeof(T));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put_array(const T* data, std::size_t count) {
    raw(data, sizeof(T) * count);
  }

  // u64 byte length followed by UTF-8 bytes.
  void put_string(std::string_view s);

  void close();

 private:
  void raw(const void* data, std::size_t bytes);

  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  // Throws FormatError when the next bytes do not equal `tag`.
  void expect_magic(std::string_view tag);

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    T value;
    raw(&value, sizeof(T));
    return value;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void get_array(T* data, std::size_t count) {
    raw(data, sizeof(T) * count);
  }

  std::string get_string();

  // Bytes left after the current position.
  std::uint64_t remaining();

  const std::filesystem::path& path() const { return path_; }

 private:
  void raw(void* data, std::size_t bytes);

  std::filesystem::path path_;
  std::ifstream in_;
  std::uint64_t size_ = 0;
};

}  // namespace heterorep::io
