#include "relchain/format_check.hpp"

#include <array>
#include <fstream>

#include "relchain/condenser.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/informativeness.hpp"

namespace relchain {

std::string_view to_string(FileKind k) {
  switch (k) {
    case FileKind::word_vectors: return "WVEC";
    case FileKind::relations: return "RELC";
    case FileKind::classifier: return "INFC";
    case FileKind::condenser: return "COND";
    case FileKind::unknown: break;
  }
  return "unknown";
}

FormatReport check_binary(std::istream& in, const std::string& source) {
  FormatReport report;
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (in.gcount() != 4) {
    report.error = source + ": too short for a magic tag";
    return report;
  }
  const std::string_view tag(magic.data(), 4);
  if (tag == "WVEC") report.kind = FileKind::word_vectors;
  else if (tag == "RELC") report.kind = FileKind::relations;
  else if (tag == "INFC") report.kind = FileKind::classifier;
  else if (tag == "COND") report.kind = FileKind::condenser;
  else {
    report.error = source + ": unrecognized magic";
    return report;
  }
  in.clear();
  in.seekg(0);
  try {
    switch (report.kind) {
      case FileKind::word_vectors: {
        const auto t = read_word_vectors_binary(in, source);
        report.dim = t.dim();
        report.count = t.size();
        report.duplicates = t.duplicates();
        break;
      }
      case FileKind::relations: {
        const auto s = read_relations_binary(in, source);
        report.dim = s.dim();
        report.count = s.size();
        report.duplicates = s.duplicates();
        break;
      }
      case FileKind::classifier: {
        const auto c = read_classifier(in, source);
        report.dim = c.dim();
        report.count = 1;
        break;
      }
      case FileKind::condenser: {
        const auto m = read_condenser(in, source);
        report.dim = static_cast<std::size_t>(m.relation_dim());
        report.count = static_cast<std::size_t>(m.latent_dim());
        break;
      }
      case FileKind::unknown: break;
    }
  } catch (const Error& e) {
    report.error = e.what();
    return report;
  }
  report.ok = report.duplicates == 0;
  if (!report.ok) report.error = source + ": " + std::to_string(report.duplicates) + " duplicate keys";
  return report;
}

FormatReport check_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    FormatReport r;
    r.error = "cannot open " + path.string();
    return r;
  }
  return check_binary(in, path.string());
}

}  // namespace relchain
