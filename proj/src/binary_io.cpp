#include "heterorep/binary_io.hpp"

namespace heterorep::io {

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw DataError("cannot open for writing: " + path.string());
}

void BinaryWriter::put_string(std::string_view s) {
  put<std::uint64_t>(s.size());
  raw(s.data(), s.size());
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw DataError("write failed: " + path_.string());
}

void BinaryWriter::raw(const void* data, std::size_t bytes) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out_) throw DataError("write failed: " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw DataError("cannot open: " + path.string());
  std::error_code ec;
  size_ = std::filesystem::file_size(path, ec);
  if (ec) throw DataError("cannot stat: " + path.string());
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string buf(tag.size(), '\0');
  if (remaining() < tag.size()) throw FormatError(path_.string() + ": file too short for magic");
  raw(buf.data(), buf.size());
  if (buf != tag) throw FormatError(path_.string() + ": bad magic, expected " + std::string(tag));
}

std::string BinaryReader::get_string() {
  const auto n = get<std::uint64_t>();
  if (n > remaining()) throw FormatError(path_.string() + ": string length exceeds file");
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

std::uint64_t BinaryReader::remaining() {
  const auto pos = in_.tellg();
  if (pos < 0) return 0;
  return size_ - static_cast<std::uint64_t>(pos);
}

void BinaryReader::raw(void* data, std::size_t bytes) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in_.gcount()) != bytes)
    throw FormatError(path_.string() + ": truncated file");
}

}  // namespace heterorep::io
