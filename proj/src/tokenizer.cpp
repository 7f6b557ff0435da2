#include "cft/tokenizer.hpp"
#include "cft/error.hpp"

#include <cctype>
#include <fstream>
#include <vector>

namespace cft {

namespace {

// Built-in merge table for the approximate_bpe kind, ranked most frequent
// first. Regenerate with tools/train_merges.py.
const char* const kDefaultMerges[] = {
#include "bpe_default_merges.inc"
};

} // namespace

std::string to_string(TokenizerKind k) {
    switch (k) {
        case TokenizerKind::ApproximateBpe: return "approximate_bpe";
        case TokenizerKind::Whitespace: return "whitespace";
        case TokenizerKind::ExternalVocab: return "external_vocab";
    }
    return "whitespace";
}

TokenizerKind tokenizer_kind_from_string(const std::string& s) {
    if (s == "approximate_bpe") return TokenizerKind::ApproximateBpe;
    if (s == "whitespace") return TokenizerKind::Whitespace;
    if (s == "external_vocab") return TokenizerKind::ExternalVocab;
    throw ConfigError("invalid tokenizer kind '" + s + "'");
}

json TokenizerSpec::to_json() const {
    json j{{"kind", to_string(kind)}};
    if (vocab_source) j["vocab_source"] = vocab_source->string();
    return j;
}

TokenizerSpec TokenizerSpec::from_json(const json& doc) {
    TokenizerSpec spec;
    spec.kind = tokenizer_kind_from_string(doc.value("kind", std::string{"approximate_bpe"}));
    if (doc.contains("vocab_source"))
        spec.vocab_source = std::filesystem::path(doc.at("vocab_source").get<std::string>());
    return spec;
}

namespace {

void insert_merge_line(std::unordered_map<std::string, uint32_t>& ranks, std::string_view line,
                       uint32_t& next_rank) {
    if (line.empty() || line.front() == '#') return;
    size_t space = line.find(' ');
    if (space == std::string_view::npos || space == 0 || space + 1 >= line.size()) return;
    std::string key(line);
    if (!ranks.count(key)) ranks.emplace(std::move(key), next_rank++);
}

} // namespace

Tokenizer Tokenizer::make(const TokenizerSpec& spec) {
    Tokenizer t;
    t.kind_ = spec.kind;
    if (spec.kind == TokenizerKind::Whitespace) return t;

    uint32_t rank = 0;
    if (spec.kind == TokenizerKind::ExternalVocab && !spec.vocab_source)
        throw ConfigError("external_vocab tokenizer requires a vocab_source");

    if (spec.vocab_source) {
        std::ifstream in(*spec.vocab_source);
        if (!in)
            throw ConfigError("cannot open vocab file: " + spec.vocab_source->string());
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
            insert_merge_line(t.merge_rank_, line, rank);
        }
        if (t.merge_rank_.empty())
            throw ConfigError("vocab file has no merges: " + spec.vocab_source->string());
    } else {
        for (const char* const merge : kDefaultMerges)
            insert_merge_line(t.merge_rank_, merge, rank);
    }
    return t;
}

namespace {

enum class CharClass { Space, Alpha, Digit, Other };

CharClass classify(unsigned char c) {
    if (std::isspace(c)) return CharClass::Space;
    if (std::isalpha(c) || c >= 0x80) return CharClass::Alpha; // UTF-8 tails ride along
    if (std::isdigit(c)) return CharClass::Digit;
    return CharClass::Other;
}

} // namespace

uint64_t Tokenizer::count_word_bpe(std::string_view word) const {
    if (word.size() <= 1) return word.empty() ? 0 : 1;
    std::vector<std::string> symbols;
    symbols.reserve(word.size());
    for (char c : word) symbols.emplace_back(1, c);

    while (symbols.size() > 1) {
        uint32_t best_rank = UINT32_MAX;
        size_t best_idx = 0;
        for (size_t i = 0; i + 1 < symbols.size(); ++i) {
            auto it = merge_rank_.find(symbols[i] + " " + symbols[i + 1]);
            if (it != merge_rank_.end() && it->second < best_rank) {
                best_rank = it->second;
                best_idx = i;
            }
        }
        if (best_rank == UINT32_MAX) break;
        symbols[best_idx] += symbols[best_idx + 1];
        symbols.erase(symbols.begin() + static_cast<ptrdiff_t>(best_idx) + 1);
    }
    return symbols.size();
}

uint64_t Tokenizer::count(std::string_view text) const {
    if (kind_ == TokenizerKind::Whitespace) {
        uint64_t n = 0;
        bool in_word = false;
        for (unsigned char c : text) {
            bool space = std::isspace(c) != 0;
            if (!space && !in_word) ++n;
            in_word = !space;
        }
        return n;
    }

    // BPE kinds: split into alpha runs, digit runs, and single punctuation
    // symbols; merge within runs only.
    uint64_t total = 0;
    size_t i = 0;
    while (i < text.size()) {
        CharClass cls = classify(static_cast<unsigned char>(text[i]));
        if (cls == CharClass::Space) {
            ++i;
            continue;
        }
        if (cls == CharClass::Other) {
            ++total;
            ++i;
            continue;
        }
        size_t j = i + 1;
        while (j < text.size() && classify(static_cast<unsigned char>(text[j])) == cls) ++j;
        total += count_word_bpe(text.substr(i, j - i));
        i = j;
    }
    return total;
}

} // namespace cft
