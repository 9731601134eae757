import { existsSync, readFileSync, writeFileSync } from "fs";
import { sha256File } from "./hash.js";

/**
 * Archive integrity policy.
 *
 * A pinned-checksums file (--checksums) always wins.  Without one, the
 * first successful fetch records each archive's sha256 in
 * archives.lock.json inside the archive directory, and every later run
 * verifies against that lock, so a mirror silently swapping bytes after
 * the first download is caught.  Mismatches abort with expected/actual.
 */
export class ChecksumPolicy {
  private pinned: Record<string, string>;
  private lock: Record<string, string>;

  constructor(private lockPath: string, pinnedPath?: string) {
    this.pinned = pinnedPath
      ? (JSON.parse(readFileSync(pinnedPath, "utf8")) as Record<string, string>)
      : {};
    this.lock = existsSync(lockPath)
      ? (JSON.parse(readFileSync(lockPath, "utf8")) as Record<string, string>)
      : {};
  }

  expected(archiveName: string): string | undefined {
    return this.pinned[archiveName] ?? this.lock[archiveName];
  }

  /** Verify one archive; records its hash when nothing was pinned yet. */
  verify(archiveName: string, path: string): void {
    const actual = sha256File(path);
    const want = this.expected(archiveName);
    if (want !== undefined && want !== actual) {
      throw new Error(
        `${archiveName}: checksum mismatch\n  expected ${want}\n  actual   ${actual}`,
      );
    }
    if (this.lock[archiveName] !== actual) {
      this.lock[archiveName] = actual;
      this.save();
    }
  }

  private save(): void {
    const sorted = Object.fromEntries(
      Object.keys(this.lock)
        .sort()
        .map((k) => [k, this.lock[k]]),
    );
    writeFileSync(this.lockPath, JSON.stringify(sorted, null, 2) + "\n");
  }
}
