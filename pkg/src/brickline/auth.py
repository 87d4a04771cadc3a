"""Credential checks, bearer tokens, and login rate limiting.

Credentials live in a static JSON file of salted PBKDF2-SHA256 hashes.
Verification is constant-time: unknown usernames are checked against a dummy
record so the timing profile does not reveal which usernames exist. Tokens
are opaque 256-bit strings held in memory with a TTL.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import threading
import time
from collections import deque
from dataclasses import dataclass

from .domain import BricklineError

PBKDF2_ITERATIONS = 60_000
DEFAULT_TOKEN_TTL_S = 12 * 3600
FAILURE_WINDOW_S = 60.0
FAILURE_LIMIT = 10


class BadCredentialsFile(BricklineError):
    pass


def _derive(password: str, salt: bytes, iterations: int) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)


def hash_password(password: str, *, iterations: int = PBKDF2_ITERATIONS) -> dict:
    salt = secrets.token_bytes(16)
    return {
        "salt": salt.hex(),
        "hash": _derive(password, salt, iterations).hex(),
        "iterations": iterations,
    }


def write_credentials_file(path, users: dict[str, str]) -> None:
    """Create a credentials file from {username: plaintext password}."""
    payload = {"users": {name: hash_password(pw) for name, pw in users.items()}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


class CredentialsFile:
    def __init__(self, records: dict[str, dict]):
        self._records = records
        # fixed decoy so unknown-user checks cost the same as real ones
        self._dummy = hash_password("decoy-password")

    @classmethod
    def load(cls, path) -> "CredentialsFile":
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
            records = payload["users"]
            for name, rec in records.items():
                bytes.fromhex(rec["salt"])
                bytes.fromhex(rec["hash"])
                int(rec["iterations"])
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise BadCredentialsFile(f"{path}: {exc}") from exc
        return cls(records)

    def verify(self, username: str, password: str) -> bool:
        record = self._records.get(username, self._dummy)
        derived = _derive(password, bytes.fromhex(record["salt"]), int(record["iterations"]))
        ok = hmac.compare_digest(derived, bytes.fromhex(record["hash"]))
        return ok and username in self._records


@dataclass(frozen=True)
class SessionToken:
    token: str
    user: str
    expires_at: float  # unix seconds


class TokenTable:
    """In-memory bearer tokens with expiry; thread-safe."""

    def __init__(self, ttl_s: float = DEFAULT_TOKEN_TTL_S, *, clock=time.time):
        self.ttl_s = ttl_s
        self._clock = clock
        self._lock = threading.Lock()
        self._tokens: dict[str, SessionToken] = {}

    def issue(self, user: str) -> SessionToken:
        token = SessionToken(
            token=secrets.token_urlsafe(32),  # 256 bits
            user=user,
            expires_at=self._clock() + self.ttl_s,
        )
        with self._lock:
            self._tokens[token.token] = token
        return token

    def validate(self, token: str | None) -> str | None:
        """Return the username for a live token, else None."""
        if not token:
            return None
        with self._lock:
            session = self._tokens.get(token)
            if session is None:
                return None
            if self._clock() >= session.expires_at:
                del self._tokens[token]
                return None
            return session.user

    def revoke(self, token: str) -> None:
        with self._lock:
            self._tokens.pop(token, None)


class LoginRateLimiter:
    """Reject further attempts once a user has FAILURE_LIMIT failures within
    the rolling window, whatever the password."""

    def __init__(self, *, limit: int = FAILURE_LIMIT, window_s: float = FAILURE_WINDOW_S,
                 clock=time.time):
        self.limit = limit
        self.window_s = window_s
        self._clock = clock
        self._lock = threading.Lock()
        self._failures: dict[str, deque] = {}

    def _prune(self, user: str, now: float) -> deque:
        q = self._failures.setdefault(user, deque())
        while q and q[0] <= now - self.window_s:
            q.popleft()
        return q

    def blocked(self, user: str) -> bool:
        with self._lock:
            return len(self._prune(user, self._clock())) >= self.limit

    def record_failure(self, user: str) -> None:
        with self._lock:
            self._prune(user, self._clock()).append(self._clock())

    def record_success(self, user: str) -> None:
        with self._lock:
            self._failures.pop(user, None)
