import init, { eigenvalue_samples, tau2_null_histogram, design_fisher } from "./pkg/isomat_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function drawRepulsion() {
  const mean = $("rep-mean").value.split(",").map(Number);
  const n = num("rep-n");
  const g = eigenvalue_samples(num("rep-mu"), num("rep-lambda"), new Float64Array(mean), n, 1n);
  const ctx = $("rep-canvas").getContext("2d");
  const w = ctx.canvas.width;
  ctx.clearRect(0, 0, w, w);
  let lo = Infinity, hi = -Infinity;
  for (const v of g) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const px = (v) => 10 + ((v - lo) / (hi - lo)) * (w - 20);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath(); ctx.moveTo(px(lo), w - px(lo)); ctx.lineTo(px(hi), w - px(hi)); ctx.stroke();
  ctx.fillStyle = "rgba(31,119,180,0.35)";
  let close = 0;
  for (let i = 0; i < n; i++) {
    // adjacent pair (γ1, γ2) in random order, as in a repulsion scatterplot
    let [a, b] = [g[3 * i], g[3 * i + 1]];
    if (Math.abs(a - b) < 0.05) close++;
    if (Math.random() < 0.5) [a, b] = [b, a];
    ctx.fillRect(px(a) - 1, w - px(b) - 1, 2, 2);
  }
  $("rep-note").textContent = `fraction of draws with |γ1 − γ2| < 0.05: ${(close / n).toFixed(4)}`;
}

function drawTau() {
  const h = JSON.parse(tau2_null_histogram(num("tau-mu"), num("tau-lambda"), num("tau-n"), 40, 2n));
  const ctx = $("tau-canvas").getContext("2d");
  const { width: w, height: ht } = ctx.canvas;
  ctx.clearRect(0, 0, w, ht);
  const top = Math.max(...h.counts, ...h.expected) * 1.05;
  const bw = (w - 20) / h.counts.length;
  const y = (c) => ht - 20 - (c / top) * (ht - 30);
  ctx.fillStyle = "#9ecae1";
  h.counts.forEach((c, k) => ctx.fillRect(10 + k * bw, y(c), bw - 1, ht - 20 - y(c)));
  ctx.strokeStyle = "#d62728";
  ctx.lineWidth = 2;
  ctx.beginPath();
  h.expected.forEach((e, k) => {
    const x = 10 + (k + 0.5) * bw;
    k === 0 ? ctx.moveTo(x, y(e)) : ctx.lineTo(x, y(e));
  });
  ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.fillText("0", 10, ht - 5);
  ctx.fillText(String(h.edges[h.edges.length - 1]), w - 25, ht - 5);
}

function runFisher() {
  try {
    const r = JSON.parse(design_fisher($("fi-scheme").value, num("fi-d"), num("fi-rho"), num("fi-eta2")));
    const cov = r.covariance.map((row) => row.map((v) => v.toExponential(2).padStart(10)).join(" ")).join("\n");
    $("fi-out").textContent =
      `acquisitions ${r.acquisitions}\nmu_bar ${r.mu_bar.toExponential(4)}\n` +
      `isotropic ${r.isotropic} (residual ${r.residual.toExponential(2)})\n\ncovariance of vec(D):\n${cov}`;
  } catch (e) {
    $("fi-out").textContent = String(e);
  }
}

await init();
$("rep-run").onclick = drawRepulsion;
$("tau-run").onclick = drawTau;
$("fi-run").onclick = runFisher;
drawRepulsion();
drawTau();
runFisher();
