#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divrec/dataset.hpp"
#include "divrec/rng.hpp"
#include "divrec/trail.hpp"
#include "divrec/types.hpp"

namespace divrec {

enum class TaskKind { GP, GF, IP, BigrecDiv, BigrecCotStage1, BigrecCotStage2 };

const char* to_string(TaskKind task);
TaskKind task_from_string(const std::string& tag);

struct InstructionSample {
    std::string instruction;
    std::string input;
    std::string output;
    TaskKind task = TaskKind::GP;
};

struct RenderedPrompt {
    std::string instruction;
    std::string input;

    std::string text() const { return instruction + "\n" + input; }
};

// Prompt templates are plain text assets with {placeholder} markers. The
// fine-tuned models are format-sensitive, so templates are versioned and the
// version hash travels with every run manifest.
struct PromptTemplates {
    std::string gp_instruction;
    std::string gp_input_prefix;
    std::string gf_instruction;
    std::string ip_instruction;
    std::string div_instruction;
    std::string cot1_instruction;
    std::string cot2_instruction;

    static PromptTemplates defaults();
    static PromptTemplates load_dir(const std::string& dir);
    void save_dir(const std::string& dir) const;
    std::string version() const;
};

struct ParsedSlot {
    std::string title;
    std::string genre; // normalized when recognizable, raw otherwise
};

struct RawTrailPair {
    std::string item;
    std::string genre;
};

// Tolerant scanner for `"item" 'genre'` pairs; whitespace between tokens is
// free-form. Quotes embedded in titles survive as long as the closing quote
// is followed by the genre token.
std::vector<RawTrailPair> scan_trail_pairs(const std::string& text);

// Fuzzy genre normalization: case-fold, trim, strip wrapping quotes, accept
// edit distance <= 1 to a taxonomy name. Nothing matched -> nullopt.
std::optional<std::string> normalize_genre(const std::string& token, const GenreTaxonomy& taxonomy);

class PromptCodec {
  public:
    PromptCodec(const GenreTaxonomy& taxonomy, PromptTemplates templates = PromptTemplates::defaults())
        : taxonomy_(&taxonomy), templates_(std::move(templates)) {}

    const PromptTemplates& templates() const { return templates_; }
    const GenreTaxonomy& taxonomy() const { return *taxonomy_; }

    // --- rendering (Table 1 formats) ---
    RenderedPrompt render_gp(const std::vector<TitledEntry>& history, int k) const;
    RenderedPrompt render_gf(const std::vector<TitledEntry>& history,
                             const std::vector<std::string>& target_genres) const;
    RenderedPrompt render_ip(const std::vector<TitledEntry>& history,
                             const std::vector<std::string>& future_genres) const;
    RenderedPrompt render_baseline(TaskKind kind, const std::vector<TitledEntry>& history, int k,
                                   const std::vector<std::string>& genres = {}) const;

    // --- parsing ---
    // Comma-split, trimmed, fuzzy-normalized, deduped, truncated to k.
    std::vector<std::string> parse_gp(const std::string& text, int k) const;
    // The 10 future-slot genre tokens of the echoed trail.
    std::vector<std::string> parse_gf(const std::string& text) const;
    // The 10 future-slot titles with their genre tags, pre-grounding.
    std::vector<ParsedSlot> parse_ip(const std::string& text) const;
    // Quoted titles for the baseline output formats.
    std::vector<std::string> parse_title_list(const std::string& text) const;

    // --- repair ---
    // Pad with genres sampled without replacement from the training
    // distribution until k names are present.
    std::vector<std::string> pad_genres(std::vector<std::string> genres, int k,
                                        const GenreDistribution& dist, Rng& rng) const;
    // Replace off-target slot genres by the least-represented target;
    // returns the repaired slots and whether every target ended up covered.
    struct GfRepair {
        std::vector<std::string> slots;
        bool targets_covered = false;
    };
    GfRepair repair_gf(std::vector<std::string> slots,
                       const std::vector<std::string>& targets) const;

    // --- training samples ---
    InstructionSample gp_sample(const std::vector<TitledEntry>& history,
                                const std::vector<std::string>& future_genres) const;
    InstructionSample gf_sample(const std::vector<TitledEntry>& history,
                                const std::vector<std::string>& target_genres,
                                const std::vector<std::string>& future_genres) const;
    InstructionSample ip_sample(const std::vector<TitledEntry>& history,
                                const std::vector<TitledEntry>& future) const;
    InstructionSample baseline_sample(TaskKind kind, const std::vector<TitledEntry>& history,
                                      int k, const std::vector<std::string>& genres,
                                      const std::vector<TitledEntry>& future) const;

  private:
    const GenreTaxonomy* taxonomy_;
    PromptTemplates templates_;
};

// JSON-lines {"instruction","input","output"}; returns the record count.
size_t export_sft(const std::vector<InstructionSample>& samples, const std::string& path);
std::vector<InstructionSample> import_sft(const std::string& path);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

} // namespace divrec
