import { createWriteStream, existsSync, mkdirSync } from "fs";
import { join } from "path";
import { pipeline } from "stream/promises";
import { Readable } from "stream";
import { ChecksumPolicy } from "./checksums.js";

export type DatasetName = "mnist" | "omniglot" | "orl";

interface ArchiveSpec {
  name: string;
  url: string; // resolved against --source-url when given
}

// default mirrors; --source-url <base> replaces everything before the
// archive file name (the ORL hosting in particular moves around)
export const ARCHIVES: Record<DatasetName, ArchiveSpec[]> = {
  mnist: [
    "train-images-idx3-ubyte.gz",
    "train-labels-idx1-ubyte.gz",
    "t10k-images-idx3-ubyte.gz",
    "t10k-labels-idx1-ubyte.gz",
  ].map((name) => ({
    name,
    url: `https://storage.googleapis.com/cvdf-datasets/mnist/${name}`,
  })),
  omniglot: [
    {
      name: "images_background.zip",
      url: "https://github.com/brendenlake/omniglot/raw/master/python/images_background.zip",
    },
    {
      name: "images_evaluation.zip",
      url: "https://github.com/brendenlake/omniglot/raw/master/python/images_evaluation.zip",
    },
  ],
  orl: [
    {
      name: "att_faces.zip",
      url: "https://www.cl.cam.ac.uk/research/dtg/attarchive/pub/data/att_faces.zip",
    },
  ],
};

export interface FetchOptions {
  archiveDir: string;
  sourceUrl?: string; // base URL override
  checksumsPath?: string; // pinned checksums file
}

async function download(url: string, dest: string): Promise<void> {
  console.log(`fetching ${url}`);
  const res = await fetch(url);
  if (!res.ok || !res.body) {
    throw new Error(`${url}: HTTP ${res.status}`);
  }
  await pipeline(Readable.fromWeb(res.body as never), createWriteStream(dest));
}

/**
 * Ensure every archive of `dataset` is present and verified.  Archives
 * already on disk are used as-is (the offline path); missing ones are
 * downloaded from the default mirror or --source-url.
 */
export async function fetchDataset(
  dataset: DatasetName,
  opts: FetchOptions,
): Promise<string[]> {
  mkdirSync(opts.archiveDir, { recursive: true });
  const policy = new ChecksumPolicy(
    join(opts.archiveDir, "archives.lock.json"),
    opts.checksumsPath,
  );
  const paths: string[] = [];
  for (const spec of ARCHIVES[dataset]) {
    const dest = join(opts.archiveDir, spec.name);
    if (!existsSync(dest)) {
      const url = opts.sourceUrl
        ? `${opts.sourceUrl.replace(/\/+$/, "")}/${spec.name}`
        : spec.url;
      await download(url, dest);
    } else {
      console.log(`${spec.name}: already present`);
    }
    policy.verify(spec.name, dest);
    paths.push(dest);
  }
  return paths;
}
