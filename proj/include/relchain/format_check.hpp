#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace relchain {

enum class FileKind { unknown, word_vectors, relations, classifier, condenser };

std::string_view to_string(FileKind k);

struct FormatReport {
  FileKind kind = FileKind::unknown;
  bool ok = false;
  std::size_t dim = 0;
  /// Records for WVEC/RELC, latent size for COND, 1 for INFC.
  std::size_t count = 0;
  std::size_t duplicates = 0;
  std::string error;
};

/// Identifies the store by its magic and runs the full reader over it.
FormatReport check_binary(std::istream& in, const std::string& source = "<input>");
FormatReport check_file(const std::filesystem::path& path);

}  // namespace relchain
