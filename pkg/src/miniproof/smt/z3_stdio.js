#!/usr/bin/env node
// SMT-LIB2 stdin/stdout shim around the z3-solver WASM build, for
// machines with node but no native z3 binary on PATH.
"use strict";
const fs = require("fs");
function locateZ3() {
  const candidates = [];
  if (process.env.Z3_SOLVER_MODULE) candidates.push(process.env.Z3_SOLVER_MODULE);
  candidates.push("z3-solver");
  candidates.push("/usr/lib/node_modules/z3-solver");
  candidates.push("/usr/local/lib/node_modules/z3-solver");
  for (const c of candidates) {
    try { return require(c); } catch (e) { /* keep trying */ }
  }
  process.stderr.write("z3-stdio: cannot locate the z3-solver node module; " +
    "run 'npm install -g z3-solver' or set Z3_SOLVER_MODULE\n");
  process.exit(2);
}
async function main() {
  const args = process.argv.slice(2);
  let text;
  if (args.length > 0 && args[0] !== "-in") {
    text = fs.readFileSync(args[0], "utf8");
  } else {
    text = fs.readFileSync(0, "utf8");
  }
  const { init } = locateZ3();
  const { Z3 } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  let out;
  try {
    out = await Z3.eval_smtlib2_string(ctx, text);
  } catch (e) {
    out = '(error "' + String(e).replace(/"/g, "'") + '")';
  }
  if (out && out.trim()) process.stdout.write(out.trim() + "\n");
  process.exit(0);
}
main().catch((e) => { process.stderr.write("z3-stdio: " + String(e) + "\n"); process.exit(2); });
