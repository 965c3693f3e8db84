import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const root = dirname(dirname(fileURLToPath(import.meta.url)));

export function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(root, "fixtures", `${name}.json`), "utf-8"));
}
