import init, { solve, reduceReal, gridSolve } from "./pkg/cms_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function show(summary, out, run) {
  summary.classList.remove("error");
  try {
    return run();
  } catch (e) {
    summary.textContent = e.message ?? String(e);
    summary.classList.add("error");
    out.textContent = "";
  }
}

function onSolve() {
  show($("solve-summary"), $("solve-out"), () => {
    const text = solve($("shift").value, $("potential").value, $("epsilon").value, $("float").checked);
    const report = JSON.parse(text);
    const r = report.result;
    $("solve-summary").textContent =
      `beta = ${r.beta} on ${r.orbit.display}; A2 = {${r.reduction.a2.symbols.join(", ")}}, delta = ${r.reduction.delta}`;
    $("solve-dot").textContent = report.dot;
    delete report.dot;
    $("solve-out").textContent = JSON.stringify(report, null, 2);
  });
}

function onReduceReal() {
  show($("real-summary"), $("real-out"), () => {
    const text = reduceReal($("center").value, $("scale").value, $("real-epsilon").value, $("beta-lb").value, $("margin").value);
    const r = JSON.parse(text).result;
    $("real-summary").textContent = `I1 = ${r.i1}, I2 = ${r.i2}, delta = ${r.delta}`;
    $("real-out").textContent = text;
  });
}

function onGridSolve() {
  show($("real-summary"), $("real-out"), () => {
    const text = gridSolve($("center").value, $("scale").value, $("top").value, Number($("points").value));
    const r = JSON.parse(text).result;
    $("real-summary").textContent =
      `beta_hat = ${r.beta_hat} at points [${r.orbit_points.join(", ")}], error at most ${r.error_bound}`;
    $("real-out").textContent = text;
  });
}

await init();
$("solve").addEventListener("click", onSolve);
$("reduce-real").addEventListener("click", onReduceReal);
$("grid-solve").addEventListener("click", onGridSolve);
onSolve();
