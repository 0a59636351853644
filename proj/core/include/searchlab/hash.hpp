#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace searchlab {

/// Incremental SHA-256; hex_digest() finalizes.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view data);

/// Streams a file through SHA-256. Throws IoError.
std::string sha256_file(const std::string& path);

}  // namespace searchlab
