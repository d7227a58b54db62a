/**
 * plotkit: offline figures from pkslab output files.
 *
 *   plotkit phase <ode-out-dir | ode_portrait.csv> --out fig.svg
 *   plotkit decay <run.csv> [more run.csv ...]     --out fig.svg
 *   plotkit sweep <sweep.csv>                      --out fig.svg
 */

import { plotDecay } from "./decay.js";
import { odeInputs, plotPhasePortrait } from "./phasePortrait.js";
import { plotSweep } from "./sweep.js";

function parseArgs(argv: string[]): { cmd: string; inputs: string[]; out: string } {
  const [cmd, ...rest] = argv;
  const inputs: string[] = [];
  let out = "figure.svg";
  for (let i = 0; i < rest.length; i++) {
    if (rest[i] === "--out") {
      out = rest[++i];
    } else {
      inputs.push(rest[i]);
    }
  }
  return { cmd: cmd ?? "", inputs, out };
}

export async function main(argv: string[]): Promise<number> {
  const { cmd, inputs, out } = parseArgs(argv);
  try {
    switch (cmd) {
      case "phase": {
        if (inputs.length !== 1) {
          throw new Error("phase needs one input (dir or portrait CSV)");
        }
        const { csv, json } = odeInputs(inputs[0]);
        await plotPhasePortrait(csv, json, out);
        return 0;
      }
      case "decay":
        await plotDecay(inputs, out);
        return 0;
      case "sweep": {
        if (inputs.length !== 1) {
          throw new Error("sweep needs exactly one sweep CSV");
        }
        await plotSweep(inputs[0], out);
        return 0;
      }
      default:
        console.error(
          "usage: plotkit <phase|decay|sweep> <inputs...> --out fig.svg",
        );
        return 2;
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const isMain = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (isMain) {
  main(process.argv.slice(2)).then((code) => process.exit(code));
}
