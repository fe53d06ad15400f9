// SPDX-License-Identifier: Apache-2.0
#include "audioqa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace audioqa {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string fmt_pct(std::optional<double> v) {
    if (!v) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << *v;
    return os.str();
}

} // namespace

nlohmann::json BenchmarkSample::to_json() const {
    return nlohmann::json{
        {"id", id},
        {"audio", audio.uri},
        {"media_type", audio.media_type},
        {"question", question.text},
        {"choices", question.choices},
        {"answer", ground_truth},
        {"category", category},
        {"difficulty", difficulty},
    };
}

DatasetLoadResult load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound(path.string());

    DatasetLoadResult out;
    std::set<std::string> seen_ids;
    std::vector<std::string> duplicates;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            BenchmarkSample s;
            s.id = j.at("id").get<std::string>();
            s.audio.uri = j.at("audio").get<std::string>();
            s.audio.media_type = j.value("media_type", "");
            if (s.audio.uri.empty()) throw Error("audio uri is empty");
            s.question.text = j.at("question").get<std::string>();
            s.question.choices = j.at("choices").get<std::vector<std::string>>();
            if (s.question.choices.size() < 2) throw Error("fewer than 2 choices");
            for (size_t a = 0; a < s.question.choices.size(); ++a)
                for (size_t b = a + 1; b < s.question.choices.size(); ++b)
                    if (trim(s.question.choices[a]) == trim(s.question.choices[b]))
                        throw Error("duplicate choices");
            s.ground_truth = j.at("answer").get<std::string>();
            s.category = j.value("category", "");
            s.difficulty = j.value("difficulty", "");

            s.ground_truth_index = -1;
            for (size_t k = 0; k < s.question.choices.size(); ++k)
                if (trim(s.question.choices[k]) == trim(s.ground_truth))
                    s.ground_truth_index = static_cast<int>(k);
            if (s.ground_truth_index < 0) throw Error("ground_truth not in choices");

            if (!seen_ids.insert(s.id).second) {
                duplicates.push_back(s.id);
                continue;
            }
            out.samples.push_back(std::move(s));
        } catch (const std::exception& e) {
            out.rejected.push_back(RejectedLine{line_number, e.what()});
        }
    }
    if (!duplicates.empty()) {
        std::string msg = "duplicate sample ids:";
        for (const auto& id : duplicates) msg += " " + id;
        throw DuplicateId(msg);
    }
    if (out.samples.empty()) throw EmptyDataset{};
    return out;
}

nlohmann::json SampleResult::to_json() const {
    return nlohmann::json{
        {"id", id},
        {"raw", raw},
        {"matched_index", matched_index ? nlohmann::json(*matched_index) : nlohmann::json(nullptr)},
        {"normalized_index",
         normalized_index ? nlohmann::json(*normalized_index) : nlohmann::json(nullptr)},
        {"correct", correct},
        {"degraded", degraded},
        {"iterations_used", iterations_used},
    };
}

SampleResult SampleResult::from_json(const nlohmann::json& j) {
    SampleResult r;
    r.id = j.at("id").get<std::string>();
    r.raw = j.at("raw").get<std::string>();
    if (!j.at("matched_index").is_null()) r.matched_index = j["matched_index"].get<int>();
    if (!j.at("normalized_index").is_null()) r.normalized_index = j["normalized_index"].get<int>();
    r.correct = j.at("correct").get<bool>();
    r.degraded = j.at("degraded").get<bool>();
    r.iterations_used = j.at("iterations_used").get<int>();
    return r;
}

std::optional<int> match_answer(const std::string& raw, const std::vector<std::string>& choices) {
    const std::string raw_trimmed = trim(raw);
    const std::string raw_low = lower(raw_trimmed);

    // 1. exact case-insensitive match
    for (size_t k = 0; k < choices.size(); ++k)
        if (raw_low == lower(trim(choices[k]))) return static_cast<int>(k);

    // 2. unique choice contained as a whole phrase; two hits is ambiguous
    std::vector<int> contained;
    for (size_t k = 0; k < choices.size(); ++k) {
        const std::string c = lower(trim(choices[k]));
        if (c.empty()) continue;
        for (size_t pos = raw_low.find(c); pos != std::string::npos;
             pos = raw_low.find(c, pos + 1)) {
            const bool left_ok = pos == 0 || !is_word_char(raw_low[pos - 1]);
            const size_t end = pos + c.size();
            const bool right_ok = end >= raw_low.size() || !is_word_char(raw_low[end]);
            if (left_ok && right_ok) {
                contained.push_back(static_cast<int>(k));
                break;
            }
        }
    }
    if (contained.size() == 1) return contained[0];
    if (contained.size() > 1) return std::nullopt; // ambiguous: never guess

    // 3. trailing option-letter patterns
    const auto letter_index = [&](char letter) -> std::optional<int> {
        const int idx = std::toupper(static_cast<unsigned char>(letter)) - 'A';
        if (idx >= 0 && idx < static_cast<int>(choices.size())) return idx;
        return std::nullopt;
    };

    static const std::regex answer_is_re(
        R"([Aa]nswer\s*(?:is\s+)?[:\-]?\s*\(?([A-Za-z])\)?(?![A-Za-z0-9]))");
    std::optional<int> hit;
    for (auto it = std::sregex_iterator(raw_trimmed.begin(), raw_trimmed.end(), answer_is_re);
         it != std::sregex_iterator(); ++it)
        hit = letter_index((*it)[1].str()[0]); // keep the last occurrence
    if (hit) return hit;

    static const std::regex paren_re(R"(\(([A-Za-z])\)[\.\s]*$)");
    std::smatch m;
    if (std::regex_search(raw_trimmed, m, paren_re))
        if (auto idx = letter_index(m[1].str()[0])) return idx;

    static const std::regex bare_re(R"((?:^|[^A-Za-z0-9])([A-Za-z])[\.\)]?\s*$)");
    if (std::regex_search(raw_trimmed, m, bare_re))
        if (auto idx = letter_index(m[1].str()[0])) return idx;

    return std::nullopt;
}

std::optional<int> normalize_with_llm(Backend& chat, const PromptLibrary& prompts,
                                      const std::string& raw,
                                      const std::vector<std::string>& choices) {
    ChatRequest req;
    const auto& tpl = prompts.get("normalize");
    req.messages.push_back({"system", tpl.system_text});
    req.messages.push_back({"user", tpl.render_user({
                                        {"raw", raw},
                                        {"choices", format_choices(choices)},
                                    })});
    std::string reply;
    try {
        reply = chat.chat(req);
    } catch (const Error&) {
        return std::nullopt; // scored incorrect, recorded by the caller
    }
    std::string t = trim(reply);
    if (lower(t) == "none") return std::nullopt;
    while (!t.empty() && !std::isalnum(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
    if (t.empty()) return std::nullopt;
    const int idx = std::toupper(static_cast<unsigned char>(t[0])) - 'A';
    // a reply longer than one token is not a clean letter; accept "B" or "B."
    if (t.size() > 2 || (t.size() == 2 && t[1] != '.')) return std::nullopt;
    if (idx < 0 || idx >= static_cast<int>(choices.size())) return std::nullopt;
    return idx;
}

std::optional<double> Cell::raw_accuracy() const {
    if (total == 0) return std::nullopt;
    return 100.0 * raw_correct / total;
}

std::optional<double> Cell::post_accuracy() const {
    if (total == 0) return std::nullopt;
    return 100.0 * post_correct / total;
}

AggregateReport score(const std::vector<SampleResult>& results,
                      const std::vector<BenchmarkSample>& samples) {
    std::map<std::string, const BenchmarkSample*> by_id;
    for (const auto& s : samples) by_id[s.id] = &s;

    AggregateReport report;
    for (const auto& s : samples) {
        report.by_category[s.category];
        if (!s.difficulty.empty()) report.by_difficulty[s.difficulty];
    }

    for (const auto& r : results) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end()) throw IdMismatch("result id has no sample: " + r.id);
        const BenchmarkSample& s = *it->second;

        const bool raw_ok = r.matched_index && *r.matched_index == s.ground_truth_index;
        const int resolved = r.matched_index ? *r.matched_index
                             : r.normalized_index ? *r.normalized_index
                                                  : -1;
        const bool post_ok = resolved == s.ground_truth_index;

        auto bump = [&](Cell& cell) {
            ++cell.total;
            if (raw_ok) ++cell.raw_correct;
            if (post_ok) ++cell.post_correct;
        };
        bump(report.overall);
        bump(report.by_category[s.category]);
        if (!s.difficulty.empty()) bump(report.by_difficulty[s.difficulty]);
    }
    return report;
}

std::string AggregateReport::to_csv() const {
    std::ostringstream os;
    os << "scope,key,total,raw_correct,raw_accuracy,post_correct,post_accuracy\n";
    auto row = [&](const std::string& scope, const std::string& key, const Cell& c) {
        os << scope << "," << key << "," << c.total << "," << c.raw_correct << ","
           << fmt_pct(c.raw_accuracy()) << "," << c.post_correct << ","
           << fmt_pct(c.post_accuracy()) << "\n";
    };
    row("overall", "all", overall);
    for (const auto& [key, cell] : by_category) row("category", key, cell);
    for (const auto& [key, cell] : by_difficulty) row("difficulty", key, cell);
    return os.str();
}

std::string AggregateReport::to_markdown() const {
    std::ostringstream os;
    auto dual = [](const Cell& c) { return fmt_pct(c.raw_accuracy()) + " / " + fmt_pct(c.post_accuracy()); };

    std::vector<std::tuple<std::string, std::string, std::string>> rows;
    rows.emplace_back("overall", std::to_string(overall.total), dual(overall));
    for (const auto& [key, cell] : by_category)
        rows.emplace_back(key.empty() ? "(uncategorized)" : key, std::to_string(cell.total),
                          dual(cell));
    for (const auto& [key, cell] : by_difficulty)
        rows.emplace_back(key, std::to_string(cell.total), dual(cell));

    size_t w0 = std::string("Scope").size(), w1 = std::string("N").size(),
           w2 = std::string("Accuracy raw / post").size();
    for (const auto& [a, b, c] : rows) {
        w0 = std::max(w0, a.size());
        w1 = std::max(w1, b.size());
        w2 = std::max(w2, c.size());
    }
    auto pad = [](const std::string& s, size_t w) { return s + std::string(w - s.size(), ' '); };
    os << "| " << pad("Scope", w0) << " | " << pad("N", w1) << " | "
       << pad("Accuracy raw / post", w2) << " |\n";
    os << "|-" << std::string(w0, '-') << "-|-" << std::string(w1, '-') << "-|-"
       << std::string(w2, '-') << "-|\n";
    for (const auto& [a, b, c] : rows)
        os << "| " << pad(a, w0) << " | " << pad(b, w1) << " | " << pad(c, w2) << " |\n";
    return os.str();
}

nlohmann::json AggregateReport::to_json() const {
    auto cell_json = [](const Cell& c) {
        return nlohmann::json{
            {"total", c.total},
            {"raw_correct", c.raw_correct},
            {"post_correct", c.post_correct},
            {"raw_accuracy", c.raw_accuracy() ? nlohmann::json(*c.raw_accuracy())
                                              : nlohmann::json(nullptr)},
            {"post_accuracy", c.post_accuracy() ? nlohmann::json(*c.post_accuracy())
                                                : nlohmann::json(nullptr)},
        };
    };
    nlohmann::json cats, diffs;
    for (const auto& [key, cell] : by_category) cats[key] = cell_json(cell);
    for (const auto& [key, cell] : by_difficulty) diffs[key] = cell_json(cell);
    return nlohmann::json{
        {"overall", cell_json(overall)}, {"by_category", cats}, {"by_difficulty", diffs}};
}

std::vector<SampleResult> evaluate_samples(const std::vector<BenchmarkSample>& samples,
                                           const BackendSet& backends,
                                           const PromptLibrary& prompts, const EvalOptions& opts) {
    std::vector<SampleResult> results(samples.size());
    std::atomic<size_t> next{0};

    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < samples.size(); i = next.fetch_add(1)) {
            const BenchmarkSample& s = samples[i];
            SampleResult r;
            r.id = s.id;
            try {
                const auto run =
                    run_pipeline(s.audio, s.question, backends, prompts, opts.pipeline, s.id);
                r.raw = run.answer.raw_text;
                r.degraded = run.answer.degraded || run.trace.degraded;
                r.iterations_used = static_cast<int>(run.trace.iterations.size());
            } catch (const std::exception& e) {
                r.raw = "(pipeline error: " + std::string(e.what()) + ")";
                r.degraded = true;
            }
            r.matched_index = match_answer(r.raw, s.question.choices);
            if (!r.matched_index && opts.normalize)
                r.normalized_index =
                    normalize_with_llm(*backends.llm, prompts, r.raw, s.question.choices);
            const int resolved = r.matched_index ? *r.matched_index
                                 : r.normalized_index ? *r.normalized_index
                                                      : -1;
            r.correct = resolved == s.ground_truth_index;
            results[i] = std::move(r);
        }
    };

    const int n_workers = std::max(1, std::min(opts.workers, static_cast<int>(samples.size())));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

BaselineReport random_baseline(const std::vector<BenchmarkSample>& samples, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SampleResult> results;
    results.reserve(samples.size());
    double expectation = 0.0;
    int correct = 0;
    for (const auto& s : samples) {
        expectation += 100.0 / s.question.choices.size();
        std::uniform_int_distribution<int> dist(0, static_cast<int>(s.question.choices.size()) - 1);
        const int pick = dist(rng);
        SampleResult r;
        r.id = s.id;
        r.raw = s.question.choices[pick];
        r.matched_index = pick;
        r.correct = pick == s.ground_truth_index;
        if (r.correct) ++correct;
        results.push_back(std::move(r));
    }
    BaselineReport out;
    out.report = score(results, samples);
    out.analytic_expectation_pct = samples.empty() ? 0.0 : expectation / samples.size();
    out.empirical_pct = samples.empty() ? 0.0 : 100.0 * correct / samples.size();
    return out;
}

std::vector<std::pair<int, AggregateReport>> sweep_iterations(
    const std::vector<BenchmarkSample>& samples, const std::function<BackendSet()>& make_backends,
    const PromptLibrary& prompts, const EvalOptions& base_opts, const std::vector<int>& budgets) {
    if (budgets.empty()) throw Error("sweep needs at least one budget");
    for (int b : budgets)
        if (b < 0) throw Error("iteration budgets must be non-negative");

    std::vector<std::pair<int, AggregateReport>> out;
    for (int budget : budgets) {
        EvalOptions opts = base_opts;
        opts.pipeline.max_iterations = budget;
        const BackendSet backends = make_backends();
        const auto results = evaluate_samples(samples, backends, prompts, opts);
        out.emplace_back(budget, score(results, samples));
    }
    return out;
}

void write_results_file(const std::vector<SampleResult>& results,
                        const std::filesystem::path& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) arr.push_back(r.to_json());
    std::ofstream out(path);
    if (!out) throw Error("cannot write results file: " + path.string());
    out << nlohmann::json{{"results", std::move(arr)}}.dump(2) << "\n";
}

std::vector<SampleResult> read_results_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound(path.string());
    const auto j = nlohmann::json::parse(in);
    std::vector<SampleResult> out;
    for (const auto& r : j.at("results")) out.push_back(SampleResult::from_json(r));
    return out;
}

} // namespace audioqa
