"""Reference values for content_diff: difflib (autojunk off), best of both argument orders."""
import difflib

PAIRS = [
    ("", ""),
    ("abc", ""),
    ("abcd", "abcd"),
    ("abcd", "bcde"),
    ("<html><title>News</title><body>Today</body></html>",
     "<html><title>News</title><body>Yesterday</body></html>"),
    ("HTTP/1.1 200 OK\r\nContent-Length: 5\r\n\r\nhello", "HTTP/1.1 200 OK\r\n\r\nhello world"),
    ("aaaaabbbbbaaaaa" * 20, "bbbbbaaaaabbbbb" * 20),
    ("The quick brown fox jumps over the lazy dog", "The quick brown cat leaps over the lazy dog"),
    ("abababbaaab", "bbab"),
    ("abbbb", "bbaaab"),
]


def main():
    for a, b in PAIRS:
        ratio = max(difflib.SequenceMatcher(None, a, b, autojunk=False).ratio(),
                    difflib.SequenceMatcher(None, b, a, autojunk=False).ratio())
        print(repr(a[:30]), repr(b[:30]), "%.12f" % (1.0 - ratio))


if __name__ == "__main__":
    main()
