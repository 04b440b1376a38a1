// Expects `wasm-pack build --target web --out-dir www/pkg` to have been run.
import init, { spectrum_demo, tail_curves, orlicz_norms } from "./pkg/specgap_wasm.js";

const $ = (id) => document.getElementById(id);

function show(out, f) {
  try {
    out.textContent = JSON.stringify(JSON.parse(f()), null, 2);
  } catch (e) {
    out.textContent = `error: ${e}`;
  }
}

function plotTails(canvas, data) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const tMax = data.t[data.t.length - 1];
  const x = (t) => 40 + (t / tMax) * (width - 60);
  // log scale down to 1e-12
  const y = (p) => 10 + (Math.min(12, -Math.log10(Math.max(p, 1e-12))) / 12) * (height - 40);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(40, 10, width - 60, height - 40);
  ctx.fillStyle = "#333";
  ctx.fillText("1", 25, 14);
  ctx.fillText("1e-12", 2, height - 30);
  ctx.fillText(`t = ${tMax}`, width - 60, height - 12);
  for (const [key, color] of [["bennett", "#c0392b"], ["bernstein", "#2c7fb8"]]) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    data.t.forEach((t, i) => (i ? ctx.lineTo(x(t), y(data[key][i])) : ctx.moveTo(x(t), y(data[key][i]))));
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(key, width - 120, key === "bennett" ? 30 : 45);
  }
}

await init();

$("spectrum-run").onclick = () =>
  show($("spectrum-out"), () =>
    spectrum_demo(+$("n").value, +$("d").value, $("directed").checked, +$("seed").value));

$("tail-run").onclick = () => {
  try {
    plotTails($("tail-plot"), JSON.parse(tail_curves(+$("m").value, +$("sigma2").value, +$("tmax").value, 200)));
  } catch (e) {
    alert(e);
  }
};

$("norms-run").onclick = () => show($("norms-out"), () => orlicz_norms($("values").value));

$("tail-run").click();
