#pragma once

// Append-only annotation store.
//
// A store directory holds the base dataset (dataset.json, written once) and
// journal.jsonl, one {"seq", "pair_id", "qa"} record per line. An append is
// acknowledged only after its line has been written and fdatasync'ed, so the
// journal is the source of truth: reopening replays it on top of the base
// dataset. A torn final line (crash mid-write) is cut off during replay.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pqa/corpus_io.hpp"
#include "pqa/dataset.hpp"
#include "pqa/error.hpp"

namespace pqa {

struct Receipt {
    std::uint64_t seq = 0;
    std::string pair_id;
    std::string qa_id;
};

enum class AppendStatus { accepted, unknown_pair, duplicate_id, invalid };

struct AppendResult {
    AppendStatus status = AppendStatus::accepted;
    std::optional<Receipt> receipt;
    std::vector<Violation> violations;

    bool ok() const { return status == AppendStatus::accepted; }
};

inline nlohmann::json to_json(const Receipt& r) {
    return {{"seq", r.seq}, {"pair_id", r.pair_id}, {"qa_id", r.qa_id}};
}

class AnnotationStore {
public:
    static constexpr const char* kBaseFile = "dataset.json";
    static constexpr const char* kJournalFile = "journal.jsonl";

    /// Opens (or initializes, when `initial` is given and the directory holds
    /// no dataset yet) the store in `dir`, replaying the journal.
    explicit AnnotationStore(std::filesystem::path dir,
                             const std::optional<ParallelQADataset>& initial = std::nullopt)
        : dir_(std::move(dir)) {
        namespace fs = std::filesystem;
        fs::create_directories(dir_);
        const fs::path base = dir_ / kBaseFile;
        ParallelQADataset ds;
        if (fs::exists(base)) {
            ds = load_pqa(base);
            if (initial && !(*initial == ds)) {
                throw InputError("store " + dir_.string() +
                                 " was initialized from a different dataset");
            }
        } else if (initial) {
            const auto violations = validate_dataset(*initial);
            if (!violations.empty()) {
                throw InputError("initial dataset invalid: " + violations.front().field + ": " +
                                 violations.front().message);
            }
            write_base(*initial, base);
            ds = *initial;
        } else {
            throw InputError("store " + dir_.string() + " has no dataset; pass one to initialize it");
        }
        replay(ds);
        snapshot_ = std::make_shared<const ParallelQADataset>(std::move(ds));

        fd_ = ::open(journal_path().c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw IoError("cannot open journal: " + std::string(std::strerror(errno)));
    }

    AnnotationStore(const AnnotationStore&) = delete;
    AnnotationStore& operator=(const AnnotationStore&) = delete;

    ~AnnotationStore() {
        if (fd_ >= 0) ::close(fd_);
    }

    std::filesystem::path journal_path() const { return dir_ / kJournalFile; }
    const std::filesystem::path& directory() const { return dir_; }

    /// Immutable view reflecting every acknowledged append.
    std::shared_ptr<const ParallelQADataset> snapshot() const {
        std::lock_guard lock(mu_);
        return snapshot_;
    }

    std::uint64_t last_seq() const {
        std::lock_guard lock(mu_);
        return last_seq_;
    }

    /// Bytes of torn trailing record removed when the store was opened.
    std::size_t recovered_bytes() const { return recovered_bytes_; }

    /// Validates, journals and applies one annotation. Rejections leave the
    /// store untouched.
    AppendResult append(const std::string& pair_id, const QAItem& qa) {
        std::lock_guard lock(mu_);
        AppendResult result;
        const auto& current = *snapshot_;
        std::size_t pair_index = current.pairs.size();
        for (std::size_t i = 0; i < current.pairs.size(); ++i) {
            if (current.pairs[i].id == pair_id) pair_index = i;
        }
        if (pair_index == current.pairs.size()) {
            result.status = AppendStatus::unknown_pair;
            result.violations.push_back({"pair_id", "unknown pair_id " + pair_id});
            return result;
        }
        if (has_qa_id(current, qa.id)) {
            result.status = AppendStatus::duplicate_id;
            result.violations.push_back({"qa.id", "duplicate id"});
            return result;
        }
        result.violations = validate_annotation(current.pairs[pair_index], qa);
        if (!result.violations.empty()) {
            result.status = AppendStatus::invalid;
            return result;
        }

        const std::uint64_t seq = last_seq_ + 1;
        const std::string line =
            nlohmann::json{{"seq", seq}, {"pair_id", pair_id}, {"qa", to_json(qa)}}.dump() + "\n";
        write_durably(line);

        auto next = std::make_shared<ParallelQADataset>(current);
        next->pairs[pair_index].qas.push_back(qa);
        snapshot_ = std::move(next);
        last_seq_ = seq;
        result.receipt = Receipt{seq, pair_id, qa.id};
        return result;
    }

private:
    static bool has_qa_id(const ParallelQADataset& ds, const std::string& id) {
        for (const auto& p : ds.pairs) {
            for (const auto& q : p.qas) {
                if (q.id == id) return true;
            }
        }
        return false;
    }

    static void fsync_path(const std::filesystem::path& p, int flags) {
        const int fd = ::open(p.c_str(), flags | O_CLOEXEC);
        if (fd < 0) return;
        ::fsync(fd);
        ::close(fd);
    }

    static void write_base(const ParallelQADataset& ds, const std::filesystem::path& base) {
        const auto tmp = base.string() + ".tmp";
        save_pqa(ds, tmp);
        fsync_path(tmp, O_RDONLY);
        std::filesystem::rename(tmp, base);
        fsync_path(base.parent_path(), O_RDONLY | O_DIRECTORY);
    }

    void write_durably(const std::string& line) {
        const off_t before = ::lseek(fd_, 0, SEEK_END);
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            const ssize_t n = ::write(fd_, p, left);
            if (n < 0) {
                if (errno == EINTR) continue;
                const std::string why = std::strerror(errno);
                if (before >= 0 && ::ftruncate(fd_, before) != 0) {
                    // the torn tail is cut on the next open
                }
                throw IoError("journal write failed: " + why);
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        if (::fdatasync(fd_) != 0) throw IoError("journal sync failed: " + std::string(std::strerror(errno)));
    }

    void replay(ParallelQADataset& ds) {
        namespace fs = std::filesystem;
        const fs::path path = journal_path();
        if (!fs::exists(path)) return;
        const std::string bytes = read_file(path);
        const std::size_t complete = bytes.rfind('\n') == std::string::npos ? 0 : bytes.rfind('\n') + 1;
        if (complete < bytes.size()) {
            recovered_bytes_ = bytes.size() - complete;
            fs::resize_file(path, complete);
            fsync_path(path, O_WRONLY);
        }

        std::size_t pos = 0;
        std::size_t lineno = 0;
        while (pos < complete) {
            const std::size_t nl = bytes.find('\n', pos);
            const std::string line = bytes.substr(pos, nl - pos);
            pos = nl + 1;
            ++lineno;
            if (line.empty()) continue;
            const std::string where = path.filename().string() + ":" + std::to_string(lineno);
            nlohmann::json rec;
            try {
                rec = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw IoError(where + ": corrupt journal record: " + e.what());
            }
            const auto seq = static_cast<std::uint64_t>(detail::require_int(rec, "seq", where));
            const std::string pair_id = detail::require_string(rec, "pair_id", where);
            QAItem qa = qa_from_json(detail::require(rec, "qa", where), where + ".qa");
            if (seq <= last_seq_) throw IoError(where + ": sequence number out of order");
            last_seq_ = seq;

            PassagePair* pair = nullptr;
            for (auto& p : ds.pairs) {
                if (p.id == pair_id) pair = &p;
            }
            if (pair == nullptr) throw IoError(where + ": unknown pair_id " + pair_id);
            if (has_qa_id(ds, qa.id)) continue;  // already applied
            const auto violations = validate_annotation(*pair, qa);
            if (!violations.empty()) {
                throw IoError(where + ": persisted annotation no longer validates: " +
                              violations.front().message);
            }
            pair->qas.push_back(std::move(qa));
        }
    }

    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::shared_ptr<const ParallelQADataset> snapshot_;
    std::uint64_t last_seq_ = 0;
    std::size_t recovered_bytes_ = 0;
    int fd_ = -1;
};

}  // namespace pqa
