#include "blindgate/ticket_store.hpp"

#include "blindgate/errors.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace blindgate::gateway {

Sha384Digest used_ticket_digest(const pbrsa::Ticket& ticket, const pbrsa::InfoBytes& info) {
    std::vector<std::uint8_t> buf;
    buf.reserve(ticket.value.size() + info.digest.size());
    buf.insert(buf.end(), ticket.value.begin(), ticket.value.end());
    buf.insert(buf.end(), info.digest.begin(), info.digest.end());
    return sha384(buf);
}

UsedTicketStore::UsedTicketStore(std::string path) : path_(std::move(path)) {
    if (path_.empty()) return; // in-memory mode
    // Replay first. Journal lines are "<96 hex chars> <utc seconds>"; a
    // trailing line without a newline is an append that never committed
    // (the caller was never told "inserted") and is dropped.
    {
        std::ifstream in(path_, std::ios::binary);
        if (in) {
            std::string content((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
            std::size_t pos = 0;
            while (pos < content.size()) {
                std::size_t nl = content.find('\n', pos);
                if (nl == std::string::npos) break; // uncommitted tail
                std::string line = content.substr(pos, nl - pos);
                pos = nl + 1;
                if (line.empty()) continue;
                std::size_t space = line.find(' ');
                if (space != 2 * kSha384Len) {
                    throw Error(Errc::storage_failure, "corrupt journal line in " + path_);
                }
                Sha384Digest d{};
                try {
                    auto bytes = from_hex(std::string_view(line).substr(0, space));
                    std::copy(bytes.begin(), bytes.end(), d.begin());
                } catch (const std::exception&) {
                    throw Error(Errc::storage_failure, "corrupt journal digest in " + path_);
                }
                std::string_view stamp = std::string_view(line).substr(space + 1);
                if (stamp.starts_with('-')) stamp.remove_prefix(1);
                if (stamp.empty() ||
                    stamp.find_first_not_of("0123456789") != std::string_view::npos) {
                    throw Error(Errc::storage_failure, "corrupt journal timestamp in " + path_);
                }
                entries_.insert(d);
            }
        }
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd_ < 0) {
        throw Error(Errc::storage_failure,
                    "cannot open journal " + path_ + ": " + std::strerror(errno));
    }
}

UsedTicketStore::~UsedTicketStore() {
    if (fd_ >= 0) ::close(fd_);
}

bool UsedTicketStore::check_and_insert(const Sha384Digest& digest, std::int64_t now_utc) {
    std::lock_guard lock(mutex_);
    if (entries_.contains(digest)) return false;
    if (fd_ < 0) { // in-memory mode
        entries_.insert(digest);
        return true;
    }

    std::string line = to_hex(digest);
    line += ' ';
    line += std::to_string(now_utc);
    line += '\n';

    std::size_t done = 0;
    while (done < line.size()) {
        ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::storage_failure,
                        "journal append failed: " + std::string(std::strerror(errno)));
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) {
        throw Error(Errc::storage_failure,
                    "journal fsync failed: " + std::string(std::strerror(errno)));
    }
    entries_.insert(digest);
    return true;
}

bool UsedTicketStore::contains(const Sha384Digest& digest) const {
    std::lock_guard lock(mutex_);
    return entries_.contains(digest);
}

std::size_t UsedTicketStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

} // namespace blindgate::gateway
