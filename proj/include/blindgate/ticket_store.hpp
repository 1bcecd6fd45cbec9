#pragma once

#include "blindgate/pbrsa.hpp"
#include "blindgate/sha384.hpp"

#include <cstdint>
#include <mutex>
#include <set>
#include <string>

namespace blindgate::gateway {

/// Digest a redemption is keyed by: SHA-384(ticket bytes || info digest).
/// Keying by ticket rather than signature catches re-randomized signatures
/// on the same ticket.
Sha384Digest used_ticket_digest(const pbrsa::Ticket& ticket, const pbrsa::InfoBytes& info);

/// Atomic set of redeemed ticket digests, backed by an append-only journal.
/// The fsync'd journal append is the commit point: check_and_insert returns
/// true only after the entry is durable, and replays the journal on open so
/// the set survives restarts.
class UsedTicketStore {
public:
    /// Opens (creating if needed) and replays the journal at `path`; an empty
    /// path keeps the set purely in memory (tests).
    /// Throws STORAGE_FAILURE if the journal cannot be opened or is corrupt.
    explicit UsedTicketStore(std::string path);
    ~UsedTicketStore();

    UsedTicketStore(const UsedTicketStore&) = delete;
    UsedTicketStore& operator=(const UsedTicketStore&) = delete;

    /// True exactly once per digest over the store's lifetime, including
    /// across restarts. Throws STORAGE_FAILURE when the append cannot be made
    /// durable; the digest then counts as not inserted.
    bool check_and_insert(const Sha384Digest& digest, std::int64_t now_utc);

    bool contains(const Sha384Digest& digest) const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::set<Sha384Digest> entries_;
    std::string path_;
    int fd_ = -1;
};

} // namespace blindgate::gateway
