/** DOM glue: renders the app into #root and forwards events. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { canSubmitCheck } from "./state.js";
import type { Section } from "./state.js";
import type { StageKey } from "./types.js";

const root = document.getElementById("root");
if (!root) {
  throw new Error("dashboard needs a #root element");
}
const app = new App(new ApiClient(""));

function redraw(): void {
  root!.innerHTML = app.render();
}

async function readFileInput(selector: string): Promise<{ name: string; content: string } | null> {
  const input = root!.querySelector<HTMLInputElement>(selector);
  const file = input?.files?.[0];
  if (!file) {
    return null;
  }
  return { name: file.name, content: await file.text() };
}

function fieldValue(selector: string): string {
  return root!.querySelector<HTMLInputElement>(selector)?.value ?? "";
}

root.addEventListener("click", async (event) => {
  const target = event.target as HTMLElement;
  const sectionLink = target.closest<HTMLElement>("[data-section]");
  if (sectionLink) {
    event.preventDefault();
    await app.setSection(sectionLink.dataset.section as Section);
    redraw();
    return;
  }
  const sortButton = target.closest<HTMLElement>("[data-sort]");
  if (sortButton) {
    app.sortLeaderboardBy(sortButton.dataset.sort as never);
    redraw();
    return;
  }
  const action = target.closest<HTMLElement>("[data-action]")?.dataset.action;
  if (!action) {
    return;
  }
  if (action === "retry") {
    await app.loadSolvers();
    redraw();
  } else if (action === "check") {
    await app.submitCheck();
    redraw();
  } else if (action === "upload-checker") {
    const file = await readFileInput('[data-field="checker-file"]');
    if (file) {
      redraw();
      await app.uploadCheckerCsv(fieldValue('[data-field="checker-name"]') || "unnamed-checker", file);
      redraw();
    }
  } else if (action === "upload-llm") {
    const file = await readFileInput('[data-field="llm-file"]');
    if (file) {
      redraw();
      await app.uploadLlmCsv(fieldValue('[data-field="model-name"]') || "unnamed-model", file);
      redraw();
    }
  }
});

root.addEventListener("change", (event) => {
  const target = event.target as HTMLElement;
  if (target instanceof HTMLSelectElement && target.dataset.stage) {
    app.selectSolver(target.dataset.stage as StageKey, target.value);
    redraw();
  } else if (target instanceof HTMLInputElement) {
    if (target.dataset.field === "user-name") {
      app.setUser({ name: target.value });
    } else if (target.dataset.field === "user-email") {
      app.setUser({ email: target.value });
    } else if (target.dataset.field === "opt-in") {
      app.setUser({ optIn: target.checked });
      redraw();
    }
  }
});

root.addEventListener("input", (event) => {
  const target = event.target as HTMLElement;
  if (target instanceof HTMLTextAreaElement && target.dataset.field === "check-text") {
    // Update the button in place instead of re-rendering, so typing in the
    // textarea never loses focus.
    app.setCheckText(target.value);
    const button = root!.querySelector<HTMLButtonElement>('[data-action="check"]');
    if (button) {
      button.disabled = !canSubmitCheck(app.state);
    }
  }
});

app.init().then(redraw);
