#include "spamclf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spamclf/errors.hpp"
#include "spamclf/rng.hpp"

namespace spamclf {

std::string_view to_string(Label label) { return label == Label::spam ? "spam" : "ham"; }

std::optional<Label> parse_label(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return std::nullopt;
  auto last = text.find_last_not_of(" \t\r\n");
  text = text.substr(first, last - first + 1);
  std::string lower(text);
  for (char& c : lower) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  if (lower == "spam") return Label::spam;
  if (lower == "ham") return Label::ham;
  return std::nullopt;
}

Corpus::Corpus(std::vector<EmailRecord> records) {
  records_.reserve(records.size());
  for (auto& r : records) add(std::move(r));
}

void Corpus::add(EmailRecord record) {
  ++class_counts_[to_int(record.label)];
  records_.push_back(std::move(record));
}

namespace {

using CsvRow = std::vector<std::string>;

std::vector<CsvRow> parse_rows(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t i = 0;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    // A blank line parses as one empty unquoted field; skip it.
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_row();
      ++i;
    } else if (c == '\n') {
      end_row();
    } else {
      field.push_back(c);
    }
    ++i;
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted field");
  if (!field.empty() || !row.empty() || field_was_quoted) end_row();
  return rows;
}

std::size_t find_column(const CsvRow& header, std::string_view name) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string cell = header[i];
    auto first = cell.find_first_not_of(" \t");
    auto last = cell.find_last_not_of(" \t");
    cell = first == std::string::npos ? "" : cell.substr(first, last - first + 1);
    for (char& c : cell) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (cell != name) continue;
    if (found) throw DataError("CSV header: ambiguous column '" + std::string(name) + "'");
    found = i;
  }
  if (!found) throw DataError("CSV header: missing column '" + std::string(name) + "'");
  return *found;
}

std::string quote_field(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Corpus parse_csv(std::string_view text) {
  auto rows = parse_rows(text);
  if (rows.empty()) throw DataError("CSV: missing header row");
  const std::size_t message_col = find_column(rows[0], "message");
  const std::size_t label_col = find_column(rows[0], "label");
  const std::size_t needed = std::max(message_col, label_col) + 1;

  Corpus corpus;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "CSV data row " + std::to_string(r);
    if (row.size() < needed) throw DataError(where + ": expected at least " + std::to_string(needed) + " fields");
    auto label = parse_label(row[label_col]);
    if (!label) throw DataError(where + ": unrecognized label '" + row[label_col] + "'");
    corpus.add({row[message_col], *label, r - 1});
  }
  return corpus;
}

Corpus load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string to_csv(const Corpus& corpus) {
  std::string out = "message,label\n";
  for (const auto& r : corpus.records()) {
    out += quote_field(r.message);
    out += ',';
    out += to_string(r.label);
    out += '\n';
  }
  return out;
}

void save_csv(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(corpus);
}

FilterResult filter_clean(const Corpus& corpus, const StopwordList& stopwords) {
  FilterResult result;
  for (const auto& r : corpus.records()) {
    if (preprocess_pipeline(r.message, stopwords).empty()) {
      ++result.dropped;
    } else {
      result.corpus.add(r);
    }
  }
  return result;
}

Split stratified_split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    by_class[to_int(corpus.records()[i].label)].push_back(i);
  }

  Rng rng(spec.seed);
  std::vector<bool> in_train(corpus.size(), false);
  for (Label label : kLabels) {
    auto& members = by_class[to_int(label)];
    if (members.size() < 2) {
      throw DataError("stratified split: class '" + std::string(to_string(label)) +
                      "' has fewer than 2 records");
    }
    rng.shuffle(std::span(members));
    const auto n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(members.size()) + 0.5 + 1e-9));
    for (std::size_t k = 0; k < n_train; ++k) in_train[members[k]] = true;
  }

  Split split;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (in_train[i] ? split.train : split.test).add(corpus.records()[i]);
  }
  return split;
}

std::string split_manifest(const Split& split, const SplitSpec& spec) {
  std::ostringstream out;
  out << "# split manifest\n";
  out << "# train_fraction=" << spec.train_fraction << " seed=" << spec.seed << "\n";
  out << "[train] " << split.train.size() << "\n";
  for (const auto& r : split.train.records()) out << r.source_index << "\n";
  out << "[test] " << split.test.size() << "\n";
  for (const auto& r : split.test.records()) out << r.source_index << "\n";
  return out.str();
}

SplitIndices parse_split_manifest(std::string_view text) {
  SplitIndices out;
  std::vector<std::size_t>* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.starts_with("[train]")) {
      current = &out.train;
    } else if (line.starts_with("[test]")) {
      current = &out.test;
    } else {
      if (current == nullptr) throw DataError("split manifest: index before section header");
      try {
        std::size_t used = 0;
        const auto value = std::stoull(line, &used);
        if (used != line.size()) throw std::invalid_argument(line);
        current->push_back(static_cast<std::size_t>(value));
      } catch (const std::exception&) {
        throw DataError("split manifest: bad index '" + line + "'");
      }
    }
  }
  return out;
}

const std::vector<std::string>& default_spam_lexicon() {
  static const std::vector<std::string> words = {
      "gratis",   "hadiah",    "promo",    "diskon",   "menang",    "klik",     "penawaran",
      "uang",     "bonus",     "murah",    "cepat",    "jutaan",    "undian",   "kredit",
      "pinjaman", "investasi", "keuntungan", "eksklusif", "terbatas", "segera",  "daftar",
      "transfer", "rekening",  "pulsa",    "voucher",  "jackpot",   "kasino",   "obat",
      "pelangsing", "langganan", "beli",   "spesial",  "untung",    "kaya",     "cashback",
      "kupon",    "pemenang",  "sekarang", "dijamin",  "instan"};
  return words;
}

const std::vector<std::string>& default_ham_lexicon() {
  static const std::vector<std::string> words = {
      "rapat",     "laporan",   "jadwal",     "proyek",     "anggaran",  "tim",       "kantor",
      "dokumen",   "presentasi", "revisi",    "diskusi",    "klien",     "kontrak",   "manajer",
      "departemen", "evaluasi", "kebijakan",  "agenda",     "catatan",   "persetujuan", "karyawan",
      "analisis",  "sistem",    "jaringan",   "server",     "pelatihan", "kegiatan",  "proposal",
      "notulen",   "koordinasi", "direktur",  "kuartal",    "strategi",  "pengembangan", "riset",
      "perusahaan", "konferensi", "peninjau", "harga",      "kontribusi"};
  return words;
}

const std::vector<std::string>& default_shared_pool() {
  static const std::vector<std::string> words = {
      "email", "pesan",  "hari",   "waktu",  "informasi", "terima", "kasih",  "mohon",
      "silakan", "halo", "bapak",  "ibu",    "semua",     "baru",   "tahun",  "bulan",
      "besok", "kabar",  "nomor",  "alamat", "minggu",    "pagi",   "sore",   "malam",
      "teman", "orang",  "kirim",  "balas",  "lihat",     "data",   "produk", "layanan"};
  return words;
}

namespace {

const std::string& pick(Rng& rng, const std::vector<std::string>& words) {
  return words[static_cast<std::size_t>(rng.index(words.size()))];
}

std::string compose_message(Rng& rng, const SyntheticSpec& spec, const std::vector<std::string>& lexicon,
                            const std::vector<std::string>& shared, const std::vector<std::string>& stopwords) {
  const std::size_t span = spec.max_words - spec.min_words + 1;
  const std::size_t n_words = spec.min_words + static_cast<std::size_t>(rng.index(span));
  const auto n_class = static_cast<std::size_t>(
      std::floor((1.0 - spec.overlap) * static_cast<double>(n_words) + 0.5));

  std::vector<std::string> words;
  words.reserve(n_words * 2);
  for (std::size_t k = 0; k < n_words; ++k) {
    words.push_back(k < n_class ? pick(rng, lexicon) : pick(rng, shared));
  }
  rng.shuffle(std::span(words));
  if (!spec.decorate) {
    std::string out;
    for (const auto& w : words) {
      if (!out.empty()) out.push_back(' ');
      out += w;
    }
    return out;
  }

  static const std::vector<std::string> kPunct = {"!", ".", ",", "?", "!!!", ":)"};
  std::string out;
  if (rng.uniform() < 0.2) out += rng.uniform() < 0.5 ? "Re: " : "FWD: ";
  for (std::size_t k = 0; k < words.size(); ++k) {
    std::string w = words[k];
    if (k == 0 || rng.uniform() < 0.1) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (rng.uniform() < 0.05) {
      for (char& c : w) c = static_cast<char>(c - 'a' + 'A');
    }
    out += w;
    if (rng.uniform() < 0.08) out += pick(rng, kPunct);
    out.push_back(' ');
    if (!stopwords.empty() && rng.uniform() < 0.15) {
      out += pick(rng, stopwords);
      out.push_back(' ');
    }
    if (rng.uniform() < 0.02) out += std::to_string(rng.index(100000)) + " ";
  }
  if (rng.uniform() < 0.3) out += "https://www.situs" + std::to_string(rng.index(1000)) + ".com/p?id=" +
                                  std::to_string(rng.index(1000)) + " ";
  if (rng.uniform() < 0.2) out += "kontak" + std::to_string(rng.index(100)) + "@mail.co.id ";
  if (rng.uniform() < 0.1) out += ".com ";
  out.pop_back();
  return out;
}

}  // namespace

Corpus generate_synthetic(const SyntheticSpec& spec) {
  if (!(spec.overlap >= 0.0 && spec.overlap <= 1.0)) {
    throw std::invalid_argument("overlap must lie in [0, 1]");
  }
  if (spec.min_words == 0 || spec.max_words < spec.min_words) {
    throw std::invalid_argument("synthetic message length range is empty");
  }
  const auto& spam = spec.spam_lexicon;
  const auto& ham = spec.ham_lexicon;
  const auto& shared = spec.shared_pool;
  if (spam.empty() || ham.empty() || shared.empty()) {
    throw std::invalid_argument("synthetic lexicons must be non-empty");
  }
  const auto stopwords = spec.decorate ? StopwordList::bundled().words() : std::vector<std::string>{};

  Rng rng(spec.seed);
  std::vector<EmailRecord> records;
  records.reserve(2 * spec.n_per_class);
  for (std::size_t k = 0; k < spec.n_per_class; ++k) {
    records.push_back({compose_message(rng, spec, spam, shared, stopwords), Label::spam, 0});
    records.push_back({compose_message(rng, spec, ham, shared, stopwords), Label::ham, 0});
  }
  rng.shuffle(std::span(records));
  for (std::size_t i = 0; i < records.size(); ++i) records[i].source_index = i;
  return Corpus(std::move(records));
}

}  // namespace spamclf
