// expect: race_free
void *worker(void *arg) {
  int *mine = malloc(sizeof(int));
  *mine = 3;
  *mine = *mine + 1;
  free(mine);
  return NULL;
}
int main() {
  create(worker);
  create(worker);
  return 0;
}
