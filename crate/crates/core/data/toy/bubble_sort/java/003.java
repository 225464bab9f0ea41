public class Task {
    // TODO: tidy up
    static void work(int[] items) {
        int left = items.length;
        int idx = 0;
        while (idx < left - 1) {
            boolean swapped = false;
            for (int j = 0; j < left - idx - 1; j++) {
                if (items[j] < items[j + 1]) {
                    int t = items[j];
                    items[j] = items[j + 1];
                    items[j + 1] = t;
                    swapped = true;
                }
            }
            if (!swapped) break;
            idx += 1;
        }
    }

    public static void main(String[] args) {
        int[] values = {-47, 17, 15, 67, 60, 26, 60, -22, -15};
        work(values);
        for (int idx = 0; idx < values.length; idx++) {
            System.out.print(values[idx] + " ");
        }
        System.out.println();
    }
}
